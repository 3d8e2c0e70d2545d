#include "bwshare/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "bwshare/error.hpp"
#include "json.hpp"

namespace bwshare {
namespace {

using nlohmann::json;

constexpr const char* kModule = "io";

[[noreturn]] void Fail(ErrorCode code, const std::string& what) {
  throw Error(kModule, code, what);
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfigInvalid, std::string("malformed JSON: ") + e.what());
  }
}

const json& Require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    Fail(ErrorCode::kConfigInvalid, std::string("missing key \"") + key + "\"");
  }
  return doc.at(key);
}

Vec ToVec(const json& node, const char* key) {
  if (!node.is_array()) {
    Fail(ErrorCode::kConfigInvalid, std::string("\"") + key + "\" must be an array");
  }
  Vec v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      Fail(ErrorCode::kConfigInvalid,
           std::string("\"") + key + "\" must contain numbers");
    }
    v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
  }
  return v;
}

Mat ToMat(const json& node, const char* key) {
  if (!node.is_array() || node.empty()) {
    Fail(ErrorCode::kConfigInvalid,
         std::string("\"") + key + "\" must be a non-empty array of rows");
  }
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(node.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < node.size(); ++r) {
    const Vec row = ToVec(node[r], key);
    if (static_cast<std::size_t>(row.size()) != cols) {
      Fail(ErrorCode::kConfigInvalid, std::string("\"") + key + "\" is ragged");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json FromVec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json FromMat(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(FromVec(m.row(r).transpose()));
  }
  return out;
}

}  // namespace

NetworkSpec NetworkSpecFromJson(const std::string& text) {
  const json doc = Parse(text);
  NetworkSpec spec;
  spec.A = ToMat(Require(doc, "A"), "A");
  spec.C = ToVec(Require(doc, "C"), "C");
  spec.nu = ToVec(Require(doc, "nu"), "nu");
  spec.mu = ToVec(Require(doc, "mu"), "mu");
  spec.kappa = ToVec(Require(doc, "kappa"), "kappa");
  const json& alpha = Require(doc, "alpha");
  if (!alpha.is_number()) Fail(ErrorCode::kConfigInvalid, "\"alpha\" must be a number");
  spec.alpha = alpha.get<double>();
  ValidateNetwork(spec);
  return spec;
}

std::string NetworkSpecToJson(const NetworkSpec& spec) {
  json doc;
  doc["A"] = FromMat(spec.A);
  doc["C"] = FromVec(spec.C);
  doc["nu"] = FromVec(spec.nu);
  doc["mu"] = FromVec(spec.mu);
  doc["kappa"] = FromVec(spec.kappa);
  doc["alpha"] = spec.alpha;
  return doc.dump(2);
}

NetworkSpec LoadNetworkSpec(const std::filesystem::path& path) {
  return NetworkSpecFromJson(ReadTextFile(path));
}

MultipathSpec MultipathSpecFromJson(const std::string& text) {
  const json doc = Parse(text);
  MultipathSpec spec;
  spec.H = ToMat(Require(doc, "H"), "H");
  spec.Abar = ToMat(Require(doc, "Abar"), "Abar");
  spec.Cbar = ToVec(Require(doc, "Cbar"), "Cbar");
  const auto I = spec.H.rows();
  spec.nu = doc.contains("nu") ? ToVec(doc["nu"], "nu") : Vec::Ones(I);
  spec.mu = doc.contains("mu") ? ToVec(doc["mu"], "mu") : Vec::Ones(I);
  spec.kappa = doc.contains("kappa") ? ToVec(doc["kappa"], "kappa") : Vec::Ones(I);
  spec.alpha = doc.value("alpha", 1.0);
  ValidateMultipath(spec);
  return spec;
}

MultipathSpec LoadMultipathSpec(const std::filesystem::path& path) {
  return MultipathSpecFromJson(ReadTextFile(path));
}

std::vector<std::vector<MixtureComponent>> MixturesFromJson(const std::string& text) {
  const json doc = Parse(text);
  const json& list = Require(doc, "mixtures");
  if (!list.is_array()) Fail(ErrorCode::kConfigInvalid, "\"mixtures\" must be an array");
  std::vector<std::vector<MixtureComponent>> out;
  for (const auto& route : list) {
    if (!route.is_array()) {
      Fail(ErrorCode::kConfigInvalid, "each mixture must be an array of pairs");
    }
    std::vector<MixtureComponent> mix;
    for (const auto& pair : route) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
          !pair[1].is_number()) {
        Fail(ErrorCode::kConfigInvalid, "mixture components are [fraction, rate]");
      }
      mix.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    out.push_back(std::move(mix));
  }
  return out;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kConfigInvalid, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) Fail(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace bwshare
