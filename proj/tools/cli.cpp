#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "bwshare/alloc.hpp"
#include "bwshare/cone.hpp"
#include "bwshare/ctmc.hpp"
#include "bwshare/error.hpp"
#include "bwshare/fluid.hpp"
#include "bwshare/io.hpp"
#include "bwshare/model.hpp"
#include "bwshare/multipath.hpp"
#include "bwshare/srbm.hpp"
#include "json.hpp"

namespace bwshare::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kModule = "cli";

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(kModule, ErrorCode::kConfigInvalid, what);
}

std::string Num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json ToJson(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json ToJson(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(ToJson(Vec(m.row(r).transpose())));
  return out;
}

// A table for CSV output plus a JSON document for JSON output.
struct Report {
  Json json = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Globals {
  std::string spec;
  std::string out;
  std::uint64_t seed = 1;
  std::string format = "json";
};

// Scenario document: network fields at the top level or under "network"
// (inline object or a path relative to the scenario file), plus the
// parameters of the command.
class Scenario {
 public:
  explicit Scenario(const std::string& path) : path_(path) {
    if (path.empty()) Invalid("--spec is required");
    if (!fs::exists(path_)) Invalid("spec file not found: " + path);
    try {
      doc_ = Json::parse(ReadTextFile(path_));
    } catch (const Json::parse_error& e) {
      Invalid(std::string("malformed JSON in ") + path + ": " + e.what());
    }
    if (!doc_.is_object()) Invalid("scenario must be a JSON object");
  }

  NetworkSpec Network() const {
    if (doc_.contains("network")) {
      const Json& net = doc_["network"];
      if (net.is_string()) return LoadNetworkSpec(Resolve(net.get<std::string>()));
      if (net.is_object()) return NetworkSpecFromJson(net.dump());
      Invalid("\"network\" must be an object or a file path");
    }
    return NetworkSpecFromJson(doc_.dump());
  }

  MultipathSpec Multipath() const {
    if (doc_.contains("multipath")) {
      const Json& net = doc_["multipath"];
      if (net.is_string()) return LoadMultipathSpec(Resolve(net.get<std::string>()));
      if (net.is_object()) return MultipathSpecFromJson(net.dump());
      Invalid("\"multipath\" must be an object or a file path");
    }
    return MultipathSpecFromJson(doc_.dump());
  }

  bool Has(const char* key) const { return doc_.contains(key); }

  Vec GetVec(const char* key) const {
    if (!Has(key)) Invalid(std::string("missing parameter \"") + key + "\"");
    const Json& node = doc_[key];
    if (!node.is_array()) Invalid(std::string("\"") + key + "\" must be an array");
    Vec v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_number()) Invalid(std::string("\"") + key + "\" must hold numbers");
      v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
    }
    return v;
  }

  Vec GetVec(const char* key, const Vec& fallback) const {
    return Has(key) ? GetVec(key) : fallback;
  }

  double GetPositive(const char* key, std::optional<double> fallback = std::nullopt) const {
    double value = 0.0;
    if (Has(key)) {
      if (!doc_[key].is_number()) Invalid(std::string("\"") + key + "\" must be a number");
      value = doc_[key].get<double>();
    } else if (fallback) {
      value = *fallback;
    } else {
      Invalid(std::string("missing parameter \"") + key + "\"");
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      Invalid(std::string("\"") + key + "\" must be positive");
    }
    return value;
  }

  int GetCount(const char* key, int fallback) const {
    if (!Has(key)) return fallback;
    if (!doc_[key].is_number_integer() || doc_[key].get<int>() <= 0) {
      Invalid(std::string("\"") + key + "\" must be a positive integer");
    }
    return doc_[key].get<int>();
  }

  const Json& Raw() const { return doc_; }

 private:
  fs::path Resolve(const std::string& rel) const {
    const fs::path p(rel);
    return p.is_absolute() ? p : path_.parent_path() / p;
  }

  fs::path path_;
  Json doc_;
};

void RequireLength(const Vec& v, Eigen::Index n, const char* key) {
  if (v.size() != n) {
    Invalid(std::string("\"") + key + "\" must have " + std::to_string(n) + " entries");
  }
}

Counts ToCounts(const Vec& v, const char* key) {
  Counts n(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] != std::floor(v[i])) {
      Invalid(std::string("\"") + key + "\" must hold nonnegative integers");
    }
    n[i] = static_cast<int>(v[i]);
  }
  return n;
}

StationaryOptions StationaryFrom(const Scenario& sc) {
  StationaryOptions o;
  if (sc.Has("burn_in")) o.burn_in = sc.GetPositive("burn_in");
  o.batches = sc.GetCount("batches", o.batches);
  return o;
}

Report Allocate(const Scenario& sc, const Globals&) {
  const NetworkSpec spec = sc.Network();
  const Vec n = sc.GetVec("n");
  RequireLength(n, spec.A.cols(), "n");
  const AllocationResult r = bwshare::Allocate(spec, n);
  Report rep;
  rep.json["lambda"] = ToJson(r.lambda);
  rep.json["p"] = ToJson(r.p);
  rep.json["kkt_residual"] = r.kkt_residual;
  rep.json["iterations"] = r.iterations;
  rep.columns = {"route", "n", "lambda"};
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    rep.rows.push_back({std::to_string(i), Num(n[i]), Num(r.lambda[i])});
  }
  return rep;
}

Report FluidRun(const Scenario& sc, const Globals&) {
  const NetworkSpec spec = sc.Network();
  const Vec n0 = sc.GetVec("n0");
  RequireLength(n0, spec.A.cols(), "n0");
  FluidOptions o;
  o.record_every = static_cast<std::size_t>(sc.GetCount("record_every", 100));
  const FluidTrajectory t = IntegrateFluid(spec, n0, sc.GetPositive("horizon", 10.0),
                                           sc.GetPositive("step", 1e-3), o);
  Report rep;
  Json states = Json::array();
  for (const auto& s : t.states) states.push_back(ToJson(s));
  rep.json["times"] = t.times;
  rep.json["states"] = std::move(states);
  rep.json["F"] = t.F_values;
  rep.json["manifold_proxy"] = t.manifold_proxy;
  rep.columns = {"t"};
  for (Eigen::Index i = 0; i < n0.size(); ++i) rep.columns.push_back("n" + std::to_string(i));
  rep.columns.push_back("F");
  rep.columns.push_back("manifold_proxy");
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::vector<std::string> row{Num(t.times[k])};
    for (Eigen::Index i = 0; i < n0.size(); ++i) row.push_back(Num(t.states[k][i]));
    row.push_back(Num(t.F_values[k]));
    row.push_back(k < t.manifold_proxy.size() ? Num(t.manifold_proxy[k]) : "");
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

Report Lift(const Scenario& sc, const Globals&) {
  const NetworkSpec spec = sc.Network();
  const Vec w = sc.GetVec("w");
  RequireLength(w, spec.A.rows(), "w");
  const LiftResult r = LiftDeltaSolve(spec, w);
  std::optional<Vec> closed;
  if (spec.alpha == 1.0) {
    try {
      closed = LiftDeltaProductForm(spec, w);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotInCone) throw;
    }
  }
  Report rep;
  rep.json["delta"] = ToJson(r.n);
  rep.json["q"] = ToJson(r.q);
  rep.json["delta_closed_form"] = closed ? ToJson(*closed) : Json(nullptr);
  rep.json["workload"] = ToJson(Workload(spec, r.n));
  rep.columns = {"route", "delta", "delta_closed_form"};
  for (Eigen::Index i = 0; i < r.n.size(); ++i) {
    rep.rows.push_back({std::to_string(i), Num(r.n[i]), closed ? Num((*closed)[i]) : ""});
  }
  return rep;
}

Report ConeReport(const Scenario& sc, const Globals&) {
  const NetworkSpec spec = sc.Network();
  const ConeGeometry g = BuildGeometry(spec, sc.GetVec("theta"));
  const CompletelySResult cs = CompletelySCheck(g.normals);
  const SkewSymmetryReport skew = SkewSymmetry(g);
  Report rep;
  rep.json["G"] = ToJson(g.G);
  rep.json["normals"] = ToJson(g.normals);
  rep.json["Gamma"] = ToJson(g.Gamma);
  rep.json["theta"] = ToJson(g.theta);
  rep.json["v"] = ToJson(g.v);
  rep.json["unit_weights"] = g.unit_weights;
  rep.json["completely_s"] = {{"holds", cs.holds}, {"witness", cs.witness}};
  rep.json["skew_symmetry_norm"] = skew.norm;
  try {
    const WedgeSlopes ws = ComputeWedgeSlopes(spec);
    rep.json["wedge"] = {{"beta_up", ws.beta_up}, {"beta_low", ws.beta_low}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTopologyMismatch) throw;
    rep.json["wedge"] = nullptr;
  }
  rep.columns = {"face", "theta", "v", "skew_symmetry_norm", "completely_s"};
  for (Eigen::Index j = 0; j < g.theta.size(); ++j) {
    rep.rows.push_back({std::to_string(j), Num(g.theta[j]), Num(g.v[j]), Num(skew.norm),
                        cs.holds ? "true" : "false"});
  }
  return rep;
}

Report SimulateCmd(const Scenario& sc, const Globals& gl) {
  const NetworkSpec spec = sc.Network();
  const auto I = spec.A.cols();
  const Counts n0 = ToCounts(sc.GetVec("n0", Vec::Zero(I)), "n0");
  RequireLength(n0.cast<double>(), I, "n0");
  const double horizon = sc.GetPositive("horizon");
  StationaryAccumulator acc(static_cast<std::size_t>(I), horizon, StationaryFrom(sc));
  SimulateOptions so;
  so.record = false;
  const PathSample path = Simulate(spec, n0, horizon, gl.seed, so, std::ref(acc));
  const StationaryEstimate est = acc.Finish();
  Report rep;
  rep.json["events"] = path.events;
  rep.json["final_state"] = ToJson(Vec(path.final_state.cast<double>()));
  rep.json["mean"] = ToJson(est.mean);
  rep.json["half_width"] = ToJson(est.half_width);
  rep.json["variance"] = ToJson(est.variance);
  rep.columns = {"route", "mean", "half_width", "variance"};
  for (Eigen::Index i = 0; i < I; ++i) {
    rep.rows.push_back({std::to_string(i), Num(est.mean[i]), Num(est.half_width[i]),
                        Num(est.variance[i])});
  }
  return rep;
}

Report SscSweep(const Scenario& sc, const Globals& gl) {
  const NetworkSpec spec = sc.Network();
  const Vec theta = sc.GetVec("theta");
  const Vec rs = sc.GetVec("r_values");
  const int seeds = sc.GetCount("seeds", 20);
  const double T = sc.GetPositive("T", 5.0);
  const double dt = sc.GetPositive("dt", 0.01);
  Report rep;
  rep.columns = {"r", "seed", "statistic"};
  Json medians = Json::array();
  for (Eigen::Index k = 0; k < rs.size(); ++k) {
    if (!(rs[k] > 0.0)) Invalid("\"r_values\" must be positive");
    std::vector<double> stats;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = gl.seed + static_cast<std::uint64_t>(s);
      const double stat = SimulateSsc(spec, theta, rs[k], T, dt, seed);
      stats.push_back(stat);
      rep.rows.push_back({Num(rs[k]), std::to_string(seed), Num(stat)});
    }
    std::sort(stats.begin(), stats.end());
    const std::size_t m = stats.size();
    const double median = m % 2 ? stats[m / 2] : 0.5 * (stats[m / 2 - 1] + stats[m / 2]);
    medians.push_back({{"r", rs[k]}, {"median", median}});
  }
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    rows.push_back({{"r", std::stod(row[0])}, {"seed", std::stoull(row[1])},
                    {"statistic", std::stod(row[2])}});
  }
  rep.json["rows"] = std::move(rows);
  rep.json["medians"] = std::move(medians);
  return rep;
}

Report SrbmRun(const Scenario& sc, const Globals& gl) {
  const NetworkSpec spec = sc.Network();
  const ConeGeometry g = BuildGeometry(spec, sc.GetVec("theta"));
  const auto J = g.G.rows();
  const Vec w0 = sc.GetVec("w0", Vec::Zero(J));
  RequireLength(w0, J, "w0");
  const double horizon = sc.GetPositive("horizon");
  const double h = sc.GetPositive("h", 1e-3);
  const int seeds = sc.GetCount("seeds", 1);
  SrbmOptions o;
  o.record_every = static_cast<std::size_t>(sc.GetCount("record_every", 10));
  std::vector<SrbmPath> paths;
  for (int s = 0; s < seeds; ++s) {
    paths.push_back(SimulateSrbm(g, w0, horizon, h, gl.seed + static_cast<std::uint64_t>(s), o));
  }
  Vec mean_w = Vec::Zero(J), mean_q = Vec::Zero(J), push = Vec::Zero(J), away = Vec::Zero(J);
  Eigen::Index samples = 0;
  for (const auto& p : paths) {
    mean_w += p.W.rowwise().sum();
    mean_q += p.Q.rowwise().sum();
    samples += p.W.cols();
    push += p.push_total;
    away += p.push_away;
  }
  mean_w /= static_cast<double>(samples);
  mean_q /= static_cast<double>(samples);
  Report rep;
  rep.json["mean_W"] = ToJson(mean_w);
  rep.json["mean_Q"] = ToJson(mean_q);
  rep.json["push_total"] = ToJson(push);
  rep.json["push_away_fraction"] = ToJson(Vec(away.cwiseQuotient(push.cwiseMax(1e-300))));
  std::optional<ProductFormReport> pf;
  if (g.unit_weights && (g.theta.array() < 0.0).all()) pf = ValidateProductForm(g, paths);
  if (pf) {
    rep.json["product_form"] = {{"samples", pf->samples},
                                {"mean", ToJson(pf->mean)},
                                {"expected_mean", ToJson(pf->expected_mean)},
                                {"half_width", ToJson(pf->half_width)},
                                {"ks", ToJson(pf->ks)},
                                {"correlation", ToJson(pf->correlation)},
                                {"v_estimate", ToJson(pf->v_estimate)},
                                {"v_relative_error", pf->v_relative_error}};
  } else {
    rep.json["product_form"] = nullptr;
  }
  rep.columns = {"face", "mean_W", "mean_Q", "expected_mean_Q", "ks"};
  for (Eigen::Index j = 0; j < J; ++j) {
    rep.rows.push_back({std::to_string(j), Num(mean_w[j]), Num(mean_q[j]),
                        pf ? Num(pf->expected_mean[j]) : "", pf ? Num(pf->ks[j]) : ""});
  }
  return rep;
}

// Linear network with unit capacities, proportional fairness and unit
// weights: the exact marginal law is known.
std::optional<ExactLinearLaw> ExactLawFor(const NetworkSpec& spec) {
  const auto J = static_cast<std::size_t>(spec.A.rows());
  if (spec.alpha != 1.0 || !(spec.kappa.array() == 1.0).all() ||
      !(spec.C.array() == 1.0).all() || spec.A.cols() != spec.A.rows() + 1) {
    return std::nullopt;
  }
  const Vec ones = Vec::Ones(static_cast<Eigen::Index>(J) + 1);
  if (spec.A != LinearNetwork(J, ones, ones, ones, 1.0, Vec::Ones(static_cast<Eigen::Index>(J))).A) {
    return std::nullopt;
  }
  const Vec rho = spec.rho();
  return ExactLinearLaw(rho[static_cast<Eigen::Index>(J)], rho.head(static_cast<Eigen::Index>(J)));
}

Report StationaryCompare(const Scenario& sc, const Globals& gl) {
  const NetworkSpec spec = sc.Network();
  const auto I = spec.A.cols();
  const StationaryApproximation approx = ApproximateStationary(spec);
  const std::optional<ExactLinearLaw> exact = ExactLawFor(spec);
  const double horizon = sc.GetPositive("horizon");
  StationaryAccumulator acc(static_cast<std::size_t>(I), horizon, StationaryFrom(sc));
  SimulateOptions so;
  so.record = false;
  Simulate(spec, Counts::Zero(I), horizon, gl.seed, so, std::ref(acc));
  const StationaryEstimate est = acc.Finish();
  Report rep;
  rep.json["simulated_mean"] = ToJson(est.mean);
  rep.json["half_width"] = ToJson(est.half_width);
  rep.json["approximation_mean"] = ToJson(approx.mean);
  Json exact_means = Json::array();
  rep.columns = {"route", "simulated_mean", "half_width", "approximation_mean", "exact_mean"};
  for (Eigen::Index i = 0; i < I; ++i) {
    std::string exact_cell;
    if (exact && static_cast<std::size_t>(i) < exact->resources()) {
      const double m = exact->MarginalMean(static_cast<std::size_t>(i));
      exact_means.push_back(m);
      exact_cell = Num(m);
    } else {
      exact_means.push_back(nullptr);
    }
    rep.rows.push_back({std::to_string(i), Num(est.mean[i]), Num(est.half_width[i]),
                        Num(approx.mean[i]), exact_cell});
  }
  rep.json["exact_mean"] = exact ? exact_means : Json(nullptr);
  return rep;
}

Report ProjectMultipath(const Scenario& sc, const Globals&) {
  const MultipathSpec spec = sc.Multipath();
  const ReducedRepresentation r = Project(spec);
  const LocalTrafficReport lt = LocalTrafficCheck(r.A);
  Report rep;
  rep.json["A"] = ToJson(r.A);
  rep.json["C"] = ToJson(r.C);
  rep.json["A_exact"] = r.A_exact;
  rep.json["C_exact"] = r.C_exact;
  Json cert = Json::array();
  for (const auto& c : r.certificate) cert.push_back(ToJson(c));
  rep.json["certificate"] = std::move(cert);
  Json witness = Json::array();
  for (const auto& w : lt.witness) witness.push_back(w ? Json(*w) : Json(nullptr));
  rep.json["local_traffic"] = {{"holds", lt.holds}, {"witness", std::move(witness)}};
  rep.json["warnings"] = r.warnings;
  const auto I = r.A.cols();
  rep.columns = {"constraint"};
  for (Eigen::Index i = 0; i < I; ++i) rep.columns.push_back("a" + std::to_string(i));
  rep.columns.push_back("C");
  for (Eigen::Index i = 0; i < I; ++i) rep.columns.push_back("certificate" + std::to_string(i));
  for (Eigen::Index j = 0; j < r.A.rows(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    std::vector<std::string> row{std::to_string(j)};
    for (Eigen::Index i = 0; i < I; ++i) row.push_back(r.A_exact[jj][static_cast<std::size_t>(i)]);
    row.push_back(r.C_exact[jj]);
    for (Eigen::Index i = 0; i < I; ++i) row.push_back(Num(r.certificate[jj][i]));
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

Report ExtendMixtureCmd(const Scenario& sc, const Globals&) {
  const NetworkSpec spec = sc.Network();
  if (!sc.Has("mixtures")) Invalid("missing parameter \"mixtures\"");
  const auto mixtures = MixturesFromJson(Json{{"mixtures", sc.Raw()["mixtures"]}}.dump());
  const ExtendedNetwork ext = ExtendMixture(spec, mixtures);
  Report rep;
  rep.json["network"] = Json::parse(NetworkSpecToJson(ext.spec));
  rep.json["origin"] = ext.origin;
  rep.json["load"] = ToJson(spec.load());
  rep.json["load_extended"] = ToJson(ext.spec.load());
  rep.columns = {"copy", "origin", "nu", "mu", "kappa"};
  for (std::size_t k = 0; k < ext.origin.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    rep.rows.push_back({std::to_string(k), std::to_string(ext.origin[k]), Num(ext.spec.nu[kk]),
                        Num(ext.spec.mu[kk]), Num(ext.spec.kappa[kk])});
  }
  return rep;
}

std::string Render(const Report& rep, const std::string& command, const std::string& format) {
  if (format == "json") {
    Json doc = Json::object();
    doc["schema"] = kSchemaVersion;
    doc["command"] = command;
    for (const auto& [k, v] : rep.json.items()) doc[k] = v;
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# schema: " << kSchemaVersion << " command: " << command << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
    os << "\n";
  };
  line(rep.columns);
  for (const auto& row : rep.rows) line(row);
  return os.str();
}

Json ErrorJson(const std::string& module, const std::string& code, const std::string& message) {
  return {{"error", {{"module", module}, {"code", code}, {"message", message}}}};
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using Handler = std::function<Report(const Scenario&, const Globals&)>;
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"allocate", {"alpha-fair allocation at a state n", Allocate}},
      {"fluid-run", {"integrate the fluid model from n0", FluidRun}},
      {"lift", {"lifting map of a workload w", Lift}},
      {"cone-report", {"workload cone geometry for a drift theta", ConeReport}},
      {"simulate", {"simulate the flow-level chain and estimate means", SimulateCmd}},
      {"ssc-sweep", {"state space collapse statistic over r and seeds", SscSweep}},
      {"srbm-run", {"simulate the reflected diffusion", SrbmRun}},
      {"stationary-compare", {"simulated vs approximate stationary means", StationaryCompare}},
      {"project-multipath", {"reduce a multi-path network", ProjectMultipath}},
      {"extend-mixture", {"exponential extension for mixture document sizes", ExtendMixtureCmd}},
  };

  Globals gl;
  CLI::App app{"Flow-level bandwidth sharing toolkit", "bwshare"};
  app.fallthrough();
  app.add_option("--spec", gl.spec, "scenario or network JSON file");
  app.add_option("--out", gl.out, "output file (default: stdout)");
  app.add_option("--seed", gl.seed, "base random seed");
  app.add_option("--format", gl.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.require_subcommand(1, 1);
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, info] : commands) subs[name] = app.add_subcommand(name, info.first);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << ErrorJson(kModule, "ConfigInvalid", e.what()).dump() << "\n";
    return kExitConfigInvalid;
  }

  for (const auto& [name, info] : commands) {
    if (!subs[name]->parsed()) continue;
    try {
      const Scenario sc(gl.spec);
      const std::string text = Render(info.second(sc, gl), name, gl.format);
      if (gl.out.empty()) {
        out << text;
      } else {
        WriteFileAtomically(gl.out, text);
      }
      return kExitOk;
    } catch (const Error& e) {
      err << ErrorJson(e.module(), std::string(ErrorCodeName(e.code())), e.what()).dump() << "\n";
      return e.code() == ErrorCode::kConfigInvalid ? kExitConfigInvalid : kExitFailure;
    } catch (const std::exception& e) {
      err << ErrorJson(kModule, "Unexpected", e.what()).dump() << "\n";
      return kExitFailure;
    }
  }
  return kExitFailure;
}

}  // namespace bwshare::cli
