#include "bwshare/fluid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bwshare/alloc.hpp"
#include "bwshare/detail/dual_newton.hpp"
#include "bwshare/error.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "fluid";

void CheckNonnegative(const NetworkSpec& spec, const Vec& v, Eigen::Index size,
                      const char* what) {
  if (v.size() != size) {
    throw Error(kModule, ErrorCode::kDimensionMismatch,
                std::string(what) + " has the wrong length");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw Error(kModule, ErrorCode::kDimensionMismatch,
                  std::string(what) + " must be finite and nonnegative");
    }
  }
  (void)spec;
}

// n_i(s) = rho_i (s / kappa_i)^(1/alpha).
double StateFromPrice(double rho, double kappa, double s, double alpha) {
  if (s <= 0.0) return 0.0;
  if (alpha == 1.0) return rho * s / kappa;
  return rho * std::pow(s / kappa, 1.0 / alpha);
}

// Capacity left after routes in the support and the zero routes' loads.
Vec BoundaryDriftSlack(const NetworkSpec& spec, const Vec& n, const Vec& lambda) {
  const Vec rho = spec.rho();
  Vec use = Vec::Zero(spec.A.cols());
  for (Eigen::Index i = 0; i < n.size(); ++i) use[i] = n[i] > 0.0 ? lambda[i] : rho[i];
  return spec.C - spec.A * use;
}

}  // namespace

double LyapunovF(const NetworkSpec& spec, const Vec& n) {
  CheckNonnegative(spec, n, spec.A.cols(), "state");
  const double a = spec.alpha;
  double f = 0.0;
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    f += spec.nu[i] * spec.kappa[i] * std::pow(spec.mu[i], a - 1.0) *
         std::pow(n[i] / spec.nu[i], a + 1.0);
  }
  return f / (a + 1.0);
}

Mat WorkloadGram(const NetworkSpec& spec) {
  const Vec b = spec.nu.cwiseQuotient(
      spec.mu.cwiseProduct(spec.mu).cwiseProduct(spec.kappa));
  return spec.A * b.asDiagonal() * spec.A.transpose();
}

LiftResult LiftDeltaSolve(const NetworkSpec& spec, const Vec& w) {
  CheckNonnegative(spec, w, spec.A.rows(), "workload");
  const Eigen::Index I = spec.A.cols();
  const Eigen::Index J = spec.A.rows();
  LiftResult out;
  out.n = Vec::Zero(I);
  out.q = Vec::Zero(J);
  const double wmax = w.maxCoeff();
  if (wmax <= 0.0) return out;

  const double alpha = spec.alpha;
  const Vec rho = spec.rho();
  const Vec& mu = spec.mu;
  const Vec& kappa = spec.kappa;
  const detail::TermFn term = [&](Eigen::Index i, double s) -> detail::Term {
    if (s < 0.0) {
      return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
    }
    const double n = StateFromPrice(rho[i], kappa[i], s, alpha);
    const double value = (s / mu[i]) * n * alpha / (alpha + 1.0);
    double curvature;
    if (s > 0.0) {
      curvature = n / (alpha * mu[i] * s);
    } else {
      curvature = alpha == 1.0 ? rho[i] / (kappa[i] * mu[i]) : 0.0;
    }
    return {value, n / mu[i], curvature};
  };

  // Start where each resource alone would carry its workload target.
  Vec q0(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    double unit = 0.0;  // workload of n(q) per unit price, summed over routes
    for (Eigen::Index i = 0; i < I; ++i) {
      unit += spec.A(j, i) * StateFromPrice(rho[i], kappa[i], 1.0, alpha) / mu[i];
    }
    const double target = std::max(w[j], 1e-3 * wmax);
    q0[j] = std::pow(target / unit, alpha);
  }

  detail::DualNewtonOptions options;
  options.tolerance = 1e-13 * wmax;
  const Vec neg_w = -w;
  const detail::DualNewtonResult res =
      detail::MinimizeSeparableDual(spec.A, neg_w, term, q0, options);

  const Vec s = spec.A.transpose() * res.y;
  for (Eigen::Index i = 0; i < I; ++i) {
    out.n[i] = StateFromPrice(rho[i], kappa[i], s[i], alpha);
  }
  out.q = res.y;
  out.iterations = res.iterations;

  // Feasibility and complementarity of the workload constraints.
  const Vec gap = Workload(spec, out.n) - w;
  const double tol = 1e-9 * wmax;
  for (Eigen::Index j = 0; j < J; ++j) {
    const double complementarity =
        out.q[j] * gap[j] / std::max(1.0, out.q[j]);
    if (gap[j] < -tol || std::abs(complementarity) > tol) {
      std::ostringstream os;
      os << "lifting map did not converge: workload gap " << gap[j]
         << " at resource " << j << " after " << res.iterations << " iterations";
      throw Error(kModule, ErrorCode::kSolverDiverged, os.str());
    }
  }
  return out;
}

Vec LiftDelta(const NetworkSpec& spec, const Vec& w) {
  return LiftDeltaSolve(spec, w).n;
}

Vec LiftDeltaProductForm(const NetworkSpec& spec, const Vec& w) {
  if (spec.alpha != 1.0) {
    throw Error(kModule, ErrorCode::kNotApplicable,
                "closed-form lifting requires alpha = 1");
  }
  if (w.size() != spec.A.rows()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "workload has the wrong length");
  }
  const Vec q = WorkloadGram(spec).ldlt().solve(w);
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q[j] < -1e-9 * scale) {
      std::ostringstream os;
      os << "w lies outside the workload cone: (ABA')^-1 w has entry " << q[j];
      throw Error(kModule, ErrorCode::kNotInCone, os.str());
    }
  }
  const Vec weights = spec.rho().cwiseQuotient(spec.kappa);
  return (weights.asDiagonal() * (spec.A.transpose() * q)).cwiseMax(0.0);
}

InvariantState InvariantFromQ(const NetworkSpec& spec, const Vec& q) {
  CheckNonnegative(spec, q, spec.A.rows(), "q");
  InvariantState out;
  out.q = q;
  const Vec s = spec.A.transpose() * q;
  const Vec rho = spec.rho();
  out.n.resize(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out.n[i] = StateFromPrice(rho[i], spec.kappa[i], s[i], spec.alpha);
  }
  if (!IsCriticallyLoaded(spec)) {
    out.allocation_gap = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const AllocationResult alloc = Allocate(spec, out.n);
  double gap = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (out.n[i] > 0.0) gap = std::max(gap, std::abs(alloc.lambda[i] - rho[i]));
  }
  out.allocation_gap = gap;
  if (gap > 1e-7) {
    std::ostringstream os;
    os << "Lambda(n) differs from rho by " << gap << " on the support";
    throw Error(kModule, ErrorCode::kInvariantViolated, os.str());
  }
  return out;
}

double ManifoldProxy(const NetworkSpec& spec, const Vec& n) {
  return (n - LiftDelta(spec, Workload(spec, n))).norm();
}

double BoundaryDriftExcess(const NetworkSpec& spec, const Vec& n) {
  const AllocationResult alloc = Allocate(spec, n);
  return std::max(0.0, -BoundaryDriftSlack(spec, n, alloc.lambda).minCoeff());
}

FluidTrajectory IntegrateFluid(const NetworkSpec& spec, const Vec& n0,
                               double horizon, double step,
                               const FluidOptions& options) {
  CheckNonnegative(spec, n0, spec.A.cols(), "initial state");
  if (!(step > 0.0) || !(horizon >= 0.0)) {
    throw Error(kModule, ErrorCode::kNonPositiveParameter,
                "step must be positive and horizon nonnegative");
  }
  const Eigen::Index I = spec.A.cols();
  const double scale = 1.0 + n0.cwiseAbs().maxCoeff();
  const double zero_threshold = 1e-9 * scale;
  const double overshoot_limit = -0.1 * scale;
  const double capacity_tol = 1e-9 * std::max(1.0, spec.C.maxCoeff());
  const std::size_t record_every = std::max<std::size_t>(1, options.record_every);
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / step - 1e-9)));

  FluidTrajectory traj;
  auto record = [&](double t, const Vec& n) {
    traj.times.push_back(t);
    traj.states.push_back(n);
    traj.F_values.push_back(LyapunovF(spec, n));
    if (options.compute_proxy) traj.manifold_proxy.push_back(ManifoldProxy(spec, n));
  };

  Vec n = n0;
  for (Eigen::Index i = 0; i < I; ++i) {
    if (n[i] <= zero_threshold) n[i] = 0.0;
  }
  record(0.0, n);

  AllocateOptions alloc_options;
  Vec drift(I);
  for (std::size_t k = 1; k <= steps; ++k) {
    const AllocationResult alloc = Allocate(spec, n, alloc_options);
    alloc_options.initial_p = alloc.p;
    const Vec slack = BoundaryDriftSlack(spec, n, alloc.lambda);
    for (Eigen::Index i = 0; i < I; ++i) {
      if (n[i] > 0.0) {
        drift[i] = spec.nu[i] - spec.mu[i] * alloc.lambda[i];
        continue;
      }
      bool hold = true;
      for (Eigen::Index j = 0; j < spec.A.rows(); ++j) {
        if (spec.A(j, i) > 0.0 && slack[j] < -capacity_tol) hold = false;
      }
      drift[i] = hold ? 0.0 : spec.nu[i];
    }
    const double t = std::min(horizon, static_cast<double>(k) * step);
    const double h = t - static_cast<double>(k - 1) * step;
    for (Eigen::Index i = 0; i < I; ++i) {
      const double next = n[i] + h * drift[i];
      if (next < overshoot_limit) {
        std::ostringstream os;
        os << "step " << step << " carries n[" << i << "] to " << next;
        throw Error(kModule, ErrorCode::kStepTooLarge, os.str());
      }
      n[i] = next <= zero_threshold ? 0.0 : next;
    }
    if (k % record_every == 0 || k == steps) record(t, n);
  }
  return traj;
}

}  // namespace bwshare
