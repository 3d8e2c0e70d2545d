#ifndef BWSHARE_ALLOC_HPP
#define BWSHARE_ALLOC_HPP

#include <optional>

#include "bwshare/model.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// Weighted alpha-fair allocation for one state n:
//   lambda  bandwidth per route, exactly 0 where n_i = 0
//   p       Lagrange multipliers of the capacity constraints; not unique when
//           A restricted to the support of n loses rank, in which case p is
//           whichever multiplier the solver converged to
struct AllocationResult {
  Vec lambda;
  Vec p;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct AllocateOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  // Starting multipliers (length J); used when they keep every active route
  // priced, otherwise the default start is used.
  std::optional<Vec> initial_p;
};

// Maximizes sum_i kappa_i n_i^alpha lambda_i^(1-alpha) / (1-alpha) (or
// sum kappa_i n_i log lambda_i at alpha = 1) subject to A lambda <= C.
// Solved on the multipliers: lambda_i(p) = n_i (kappa_i / (p'A)_i)^(1/alpha)
// turns the problem into a smooth convex minimization over p >= 0.
// Throws Error{kSolverDiverged} if the KKT residual stays above tolerance.
AllocationResult Allocate(const NetworkSpec& spec, const Vec& n,
                          const AllocateOptions& options = {});

// Objective value for lambda indexed by route (entries off the support of n
// are ignored). Returns -infinity when alpha >= 1 and some supported lambda_i
// is 0.
double Utility(const NetworkSpec& spec, const Vec& n, const Vec& lambda);

// Largest of: primal infeasibility (A lambda - C)_+, negativity of p,
// |p_j (C_j - (A lambda)_j)| / max(1, p_j), relative stationarity gaps on the
// support, and |lambda_i| off the support.
double KktResidual(const NetworkSpec& spec, const Vec& n, const Vec& lambda,
                   const Vec& p);

}  // namespace bwshare

#endif  // BWSHARE_ALLOC_HPP
