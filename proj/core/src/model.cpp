#include "bwshare/model.hpp"

#include <cmath>
#include <sstream>

#include "bwshare/error.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "model";

[[noreturn]] void Fail(ErrorCode code, const std::string& what) {
  throw Error(kModule, code, what);
}

void CheckPositive(const Vec& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      std::ostringstream os;
      os << name << "[" << i << "] = " << v[i] << " must be positive";
      Fail(ErrorCode::kNonPositiveParameter, os.str());
    }
  }
}

}  // namespace

const NetworkSpec& ValidateNetwork(const NetworkSpec& spec) {
  const auto J = spec.A.rows();
  const auto I = spec.A.cols();
  if (J == 0 || I == 0) {
    Fail(ErrorCode::kDimensionMismatch, "A must have at least one row and column");
  }
  if (spec.C.size() != J || spec.nu.size() != I || spec.mu.size() != I ||
      spec.kappa.size() != I) {
    Fail(ErrorCode::kDimensionMismatch,
         "C must have J entries and nu, mu, kappa must have I entries");
  }
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index i = 0; i < I; ++i) {
      const double a = spec.A(j, i);
      if (!(a >= 0.0) || !std::isfinite(a)) {
        std::ostringstream os;
        os << "A(" << j << "," << i << ") = " << a << " must be nonnegative";
        Fail(ErrorCode::kNonPositiveParameter, os.str());
      }
    }
  }
  // Rank of A' (I x J) via column-pivoted QR; rank J means full row rank.
  Eigen::ColPivHouseholderQR<Mat> qr(spec.A.transpose());
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < J) {
    std::ostringstream os;
    os << "A has rank " << qr.rank() << " < J = " << J;
    Fail(ErrorCode::kRankDeficient, os.str());
  }
  for (Eigen::Index i = 0; i < I; ++i) {
    if (spec.A.col(i).maxCoeff() <= 0.0) {
      std::ostringstream os;
      os << "route " << i << " uses no resource";
      Fail(ErrorCode::kEmptyRoute, os.str());
    }
  }
  CheckPositive(spec.C, "C");
  CheckPositive(spec.nu, "nu");
  CheckPositive(spec.mu, "mu");
  CheckPositive(spec.kappa, "kappa");
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    Fail(ErrorCode::kNonPositiveParameter, "alpha must be positive");
  }
  return spec;
}

bool IsCriticallyLoaded(const NetworkSpec& spec) {
  const Vec gap = spec.load() - spec.C;
  const double scale = std::max(1.0, spec.C.cwiseAbs().maxCoeff());
  return gap.cwiseAbs().maxCoeff() <= kCriticalTolerance * scale;
}

Vec Workload(const NetworkSpec& spec, const Vec& n) {
  if (n.size() != spec.A.cols()) {
    Fail(ErrorCode::kDimensionMismatch, "state length must equal route count");
  }
  return spec.A * n.cwiseQuotient(spec.mu);
}

NetworkSpec HeavyTrafficNetwork(const NetworkSpec& base, const Vec& theta,
                                double r) {
  return BuildHeavyTrafficSequence(base, theta, {r}).per_r.front();
}

HeavyTrafficSequence BuildHeavyTrafficSequence(const NetworkSpec& base,
                                               const Vec& theta,
                                               const std::vector<double>& r_values) {
  ValidateNetwork(base);
  if (theta.size() != base.A.rows()) {
    Fail(ErrorCode::kDimensionMismatch, "theta must have J entries");
  }
  if (!IsCriticallyLoaded(base)) {
    Fail(ErrorCode::kNotCriticallyLoaded, "base network must satisfy A rho = C");
  }
  HeavyTrafficSequence seq;
  seq.base = base;
  seq.theta = theta;
  const Mat AAt = base.A * base.A.transpose();
  seq.delta = base.A.transpose() * AAt.ldlt().solve(theta);
  // A rho = C holds only to rounding; absorb the residual into delta so that
  // r (A rho^r - C) reproduces theta as tightly as floating point allows.
  const Vec residual = base.load() - base.C;
  const Vec correction = base.A.transpose() * AAt.ldlt().solve(residual);

  double previous = 0.0;
  for (double r : r_values) {
    if (!(r > previous)) {
      Fail(ErrorCode::kNonPositiveParameter,
           "r values must be positive and strictly increasing");
    }
    previous = r;
    NetworkSpec net = base;
    const Vec drho = seq.delta / r - correction;
    net.nu = base.nu + base.mu.cwiseProduct(drho);
    for (Eigen::Index i = 0; i < net.nu.size(); ++i) {
      if (!(net.nu[i] > 0.0)) {
        std::ostringstream os;
        os << "r = " << r << " gives nu[" << i << "] = " << net.nu[i];
        Fail(ErrorCode::kRatePositivityViolated, os.str());
      }
    }
    seq.r_values.push_back(r);
    seq.per_r.push_back(std::move(net));
  }
  return seq;
}

ExtendedNetwork ExtendMixture(
    const NetworkSpec& spec,
    const std::vector<std::vector<MixtureComponent>>& mixtures) {
  ValidateNetwork(spec);
  const auto I = static_cast<std::size_t>(spec.A.cols());
  if (mixtures.size() != I) {
    Fail(ErrorCode::kDimensionMismatch, "one mixture per route is required");
  }
  std::size_t copies = 0;
  for (std::size_t i = 0; i < I; ++i) {
    const auto& mix = mixtures[i];
    if (mix.empty()) Fail(ErrorCode::kMixtureInvalid, "empty mixture");
    double total = 0.0;
    double mean = 0.0;
    for (const auto& c : mix) {
      if (!(c.fraction > 0.0)) {
        Fail(ErrorCode::kMixtureInvalid, "mixture fractions must be positive");
      }
      if (!(c.rate > 0.0)) {
        Fail(ErrorCode::kMixtureInvalid, "component rates must be positive");
      }
      total += c.fraction;
      mean += c.fraction / c.rate;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "route " << i << " fractions sum to " << total;
      Fail(ErrorCode::kMixtureInvalid, os.str());
    }
    const double expected = 1.0 / spec.mu[static_cast<Eigen::Index>(i)];
    if (std::abs(mean - expected) > 1e-12 * expected) {
      std::ostringstream os;
      os << "route " << i << " mixture mean " << mean << " differs from 1/mu = "
         << expected;
      Fail(ErrorCode::kMixtureInvalid, os.str());
    }
    copies += mix.size();
  }

  ExtendedNetwork out;
  const auto K = static_cast<Eigen::Index>(copies);
  out.spec.A.resize(spec.A.rows(), K);
  out.spec.C = spec.C;
  out.spec.nu.resize(K);
  out.spec.mu.resize(K);
  out.spec.kappa.resize(K);
  out.spec.alpha = spec.alpha;
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < I; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (const auto& c : mixtures[i]) {
      out.spec.A.col(k) = spec.A.col(ii);
      out.spec.nu[k] = c.fraction * spec.nu[ii];
      out.spec.mu[k] = c.rate;
      out.spec.kappa[k] = spec.kappa[ii];
      out.origin.push_back(i);
      ++k;
    }
  }
  return out;
}

Vec CollapseCounts(const ExtendedNetwork& extended, const Vec& per_copy) {
  if (per_copy.size() != static_cast<Eigen::Index>(extended.origin.size())) {
    Fail(ErrorCode::kDimensionMismatch, "vector length must equal copy count");
  }
  std::size_t I = 0;
  for (auto o : extended.origin) I = std::max(I, o + 1);
  Vec out = Vec::Zero(static_cast<Eigen::Index>(I));
  for (std::size_t k = 0; k < extended.origin.size(); ++k) {
    out[static_cast<Eigen::Index>(extended.origin[k])] +=
        per_copy[static_cast<Eigen::Index>(k)];
  }
  return out;
}

NetworkSpec CollapseMixture(const ExtendedNetwork& extended) {
  const NetworkSpec& ext = extended.spec;
  const Vec nu = CollapseCounts(extended, ext.nu);
  // nu_i / mu_i = sum_k nu_k / mu_k, so the collapsed mean size is the
  // nu-weighted average of the copy means.
  const Vec load = CollapseCounts(extended, ext.rho());
  const auto I = nu.size();
  NetworkSpec out;
  out.A.resize(ext.A.rows(), I);
  out.C = ext.C;
  out.nu = nu;
  out.mu = nu.cwiseQuotient(load);
  out.kappa.resize(I);
  out.alpha = ext.alpha;
  for (std::size_t k = 0; k < extended.origin.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(extended.origin[k]);
    out.A.col(i) = ext.A.col(static_cast<Eigen::Index>(k));
    out.kappa[i] = ext.kappa[static_cast<Eigen::Index>(k)];
  }
  return out;
}

NetworkSpec LinearNetwork(std::size_t J, const Vec& nu, const Vec& mu,
                          const Vec& kappa, double alpha, const Vec& C) {
  const auto j = static_cast<Eigen::Index>(J);
  NetworkSpec spec;
  spec.A = Mat::Zero(j, j + 1);
  for (Eigen::Index r = 0; r < j; ++r) {
    spec.A(r, r) = 1.0;
    spec.A(r, j) = 1.0;
  }
  spec.C = C;
  spec.nu = nu;
  spec.mu = mu;
  spec.kappa = kappa;
  spec.alpha = alpha;
  ValidateNetwork(spec);
  return spec;
}

}  // namespace bwshare
