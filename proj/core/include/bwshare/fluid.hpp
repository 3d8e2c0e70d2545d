#ifndef BWSHARE_FLUID_HPP
#define BWSHARE_FLUID_HPP

#include <cstddef>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

struct FluidTrajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> F_values;
  // |n(t) - Delta(w(n(t)))|; empty when not requested.
  std::vector<double> manifold_proxy;
};

struct FluidOptions {
  // Keep every k-th Euler step (the final step is always kept).
  std::size_t record_every = 1;
  bool compute_proxy = true;
};

// Clamped explicit Euler for dn_i/dt = nu_i - mu_i Lambda_i(n).
//
// A component at zero (below 1e-9 (1 + |n0|_inf)) keeps derivative 0 as long
// as every resource it uses satisfies
//   sum_{n_k > 0} A_jk Lambda_k + sum_{n_k = 0} A_jk rho_k <= C_j,
// i.e. holding it at zero is consistent with the fluid equations. If some
// resource it uses violates that, the component is released and grows at
// rate nu_i.
//
// Throws Error{kStepTooLarge} when one step would carry a component below
// -0.1 (1 + |n0|_inf), i.e. h is coarse relative to the state scale.
FluidTrajectory IntegrateFluid(const NetworkSpec& spec, const Vec& n0,
                               double horizon, double step,
                               const FluidOptions& options = {});

// Largest violation of the boundary-drift capacity condition above at n.
double BoundaryDriftExcess(const NetworkSpec& spec, const Vec& n);

// F(n) = 1/(alpha+1) sum_i nu_i kappa_i mu_i^(alpha-1) (n_i / nu_i)^(alpha+1).
double LyapunovF(const NetworkSpec& spec, const Vec& n);

struct LiftResult {
  Vec n;
  // Multipliers of the workload constraints; n = n(q) as in InvariantFromQ.
  Vec q;
  int iterations = 0;
};

// Delta(w): the minimizer of F(n) subject to w(n) >= w, n >= 0, found on the
// multipliers q >= 0 (any alpha). Throws Error{kSolverDiverged}.
LiftResult LiftDeltaSolve(const NetworkSpec& spec, const Vec& w);
Vec LiftDelta(const NetworkSpec& spec, const Vec& w);

// Closed form for alpha = 1 on the workload cone:
//   Delta(w) = diag(rho) diag(kappa)^-1 A' (A B A')^-1 w.
// Throws Error{kNotInCone} if (ABA')^-1 w has an entry below
// -1e-9 max(1, |q|_inf), Error{kNotApplicable} if alpha != 1.
Vec LiftDeltaProductForm(const NetworkSpec& spec, const Vec& w);

// B = diag(nu_i / (mu_i^2 kappa_i)) and G = A B A'.
Mat WorkloadGram(const NetworkSpec& spec);

struct InvariantState {
  Vec n;
  Vec q;
  // max over the support of |Lambda_i(n) - rho_i|; only meaningful for
  // critically loaded networks (NaN otherwise).
  double allocation_gap = 0.0;
};

// n_i = rho_i ((q'A)_i / kappa_i)^(1/alpha). On a critically loaded network
// also checks Lambda(n) = rho on the support and throws
// Error{kInvariantViolated} if the gap exceeds 1e-7.
InvariantState InvariantFromQ(const NetworkSpec& spec, const Vec& q);

// |n - Delta(w(n))|, zero exactly on the invariant manifold.
double ManifoldProxy(const NetworkSpec& spec, const Vec& n);

}  // namespace bwshare

#endif  // BWSHARE_FLUID_HPP
