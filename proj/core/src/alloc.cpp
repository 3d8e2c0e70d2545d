#include "bwshare/alloc.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bwshare/detail/dual_newton.hpp"
#include "bwshare/error.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "alloc";
constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckState(const NetworkSpec& spec, const Vec& n) {
  if (n.size() != spec.A.cols()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch,
                "state length must equal route count");
  }
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (!(n[i] >= 0.0) || !std::isfinite(n[i])) {
      throw Error(kModule, ErrorCode::kDimensionMismatch,
                  "state entries must be finite and nonnegative");
    }
  }
}

// Bandwidth of a route with count n, weight kappa, path price s.
double RouteBandwidth(double n, double kappa, double s, double alpha) {
  if (alpha == 1.0) return kappa * n / s;
  return n * std::pow(kappa / s, 1.0 / alpha);
}

}  // namespace

AllocationResult Allocate(const NetworkSpec& spec, const Vec& n,
                          const AllocateOptions& options) {
  CheckState(spec, n);
  const Eigen::Index I = spec.A.cols();
  const Eigen::Index J = spec.A.rows();
  const double alpha = spec.alpha;

  AllocationResult out;
  out.lambda = Vec::Zero(I);
  out.p = Vec::Zero(J);

  std::vector<Eigen::Index> routes;
  for (Eigen::Index i = 0; i < I; ++i) {
    if (n[i] > 0.0) routes.push_back(i);
  }
  if (routes.empty()) return out;

  // Resources touched by the support; the rest keep p_j = 0.
  std::vector<Eigen::Index> resources;
  for (Eigen::Index j = 0; j < J; ++j) {
    for (auto i : routes) {
      if (spec.A(j, i) > 0.0) {
        resources.push_back(j);
        break;
      }
    }
  }
  const auto R = static_cast<Eigen::Index>(resources.size());
  const auto S = static_cast<Eigen::Index>(routes.size());
  Mat A(R, S);
  Vec C(R);
  Vec ns(S), ks(S);
  for (Eigen::Index a = 0; a < R; ++a) {
    C[a] = spec.C[resources[a]];
    for (Eigen::Index b = 0; b < S; ++b) A(a, b) = spec.A(resources[a], routes[b]);
  }
  for (Eigen::Index b = 0; b < S; ++b) {
    ns[b] = n[routes[b]];
    ks[b] = spec.kappa[routes[b]];
  }

  const detail::TermFn term = [&](Eigen::Index b, double s) -> detail::Term {
    if (!(s > 0.0)) return {kInf, -kInf, kInf};
    const double lam = RouteBandwidth(ns[b], ks[b], s, alpha);
    double value;
    if (alpha == 1.0) {
      const double kn = ks[b] * ns[b];
      value = kn * std::log(kn / s) - kn;
    } else {
      value = s * lam * alpha / (1.0 - alpha);
    }
    return {value, -lam, lam / (alpha * s)};
  };

  Vec p0(R);
  bool warm = false;
  if (options.initial_p && options.initial_p->size() == J) {
    for (Eigen::Index a = 0; a < R; ++a) p0[a] = (*options.initial_p)[resources[a]];
    const Vec s = A.transpose() * p0;
    warm = (p0.array() >= 0.0).all() && (s.array() > 0.0).all();
  }
  if (!warm) {
    for (Eigen::Index a = 0; a < R; ++a) {
      double acc = 0.0;
      for (Eigen::Index b = 0; b < S; ++b) {
        acc += A(a, b) * ks[b] * std::pow(ns[b], alpha);
      }
      p0[a] = acc / C[a];
    }
  }

  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  detail::DualNewtonOptions dn;
  dn.max_iterations = options.max_iterations;
  dn.tolerance = 1e-13 * scale;
  int total_iterations = 0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const detail::DualNewtonResult res =
        detail::MinimizeSeparableDual(A, C, term, p0, dn);
    total_iterations += res.iterations;
    out.p.setZero();
    out.lambda.setZero();
    const Vec s = A.transpose() * res.y;
    for (Eigen::Index a = 0; a < R; ++a) out.p[resources[a]] = res.y[a];
    for (Eigen::Index b = 0; b < S; ++b) {
      out.lambda[routes[b]] = RouteBandwidth(ns[b], ks[b], s[b], alpha);
    }
    out.kkt_residual = KktResidual(spec, n, out.lambda, out.p);
    out.iterations = total_iterations;
    if (out.kkt_residual < options.tolerance) return out;
    p0 = res.y;
    dn.tolerance *= 0.01;
  }
  std::ostringstream os;
  os << "allocation did not reach KKT residual " << options.tolerance
     << " (residual " << out.kkt_residual << " after " << out.iterations
     << " iterations)";
  throw Error(kModule, ErrorCode::kSolverDiverged, os.str());
}

double Utility(const NetworkSpec& spec, const Vec& n, const Vec& lambda) {
  CheckState(spec, n);
  if (lambda.size() != n.size()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch,
                "lambda length must equal route count");
  }
  const double alpha = spec.alpha;
  double g = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) continue;
    const double lam = lambda[i];
    if (alpha >= 1.0 && !(lam > 0.0)) return -kInf;
    if (alpha == 1.0) {
      g += spec.kappa[i] * n[i] * std::log(lam);
    } else {
      g += spec.kappa[i] * std::pow(n[i], alpha) * std::pow(lam, 1.0 - alpha) /
           (1.0 - alpha);
    }
  }
  return g;
}

double KktResidual(const NetworkSpec& spec, const Vec& n, const Vec& lambda,
                   const Vec& p) {
  CheckState(spec, n);
  if (lambda.size() != n.size() || p.size() != spec.A.rows()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch,
                "lambda must have I entries and p must have J entries");
  }
  const Vec used = spec.A * lambda;
  const Vec prices = spec.A.transpose() * p;
  double r = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double slack = spec.C[j] - used[j];
    r = std::max(r, std::max(0.0, -slack));
    r = std::max(r, std::max(0.0, -p[j]));
    r = std::max(r, std::abs(p[j] * slack) / std::max(1.0, p[j]));
  }
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] > 0.0) {
      if (!(prices[i] > 0.0)) return kInf;
      const double target = RouteBandwidth(n[i], spec.kappa[i], prices[i], spec.alpha);
      r = std::max(r, std::abs(lambda[i] - target) / std::max(1.0, std::abs(target)));
    } else {
      r = std::max(r, std::abs(lambda[i]));
    }
  }
  return r;
}

}  // namespace bwshare
