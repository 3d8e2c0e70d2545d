#ifndef BWSHARE_DETAIL_DUAL_NEWTON_HPP
#define BWSHARE_DETAIL_DUAL_NEWTON_HPP

#include <functional>

#include "bwshare/types.hpp"

namespace bwshare::detail {

// Value and first two derivatives of one separable term h_i(s).
struct Term {
  double value;
  double d1;
  double d2;
};

using TermFn = std::function<Term(Eigen::Index i, double s)>;

struct DualNewtonOptions {
  // Absolute tolerance on the projected gradient.
  double tolerance = 1e-13;
  int max_iterations = 10000;
};

struct DualNewtonResult {
  Vec y;
  Vec gradient;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Minimizes  f(y) = c.y + sum_i h_i((A' y)_i)  over y >= 0, with A of size
// J x I and each h_i convex (value may be +inf outside its domain; y0 must be
// in the domain). Projected Newton with an epsilon-active set and Armijo
// backtracking; cyclic coordinate minimization takes over if the Newton line
// search stalls.
DualNewtonResult MinimizeSeparableDual(const Mat& A, const Vec& c,
                                       const TermFn& h, Vec y0,
                                       const DualNewtonOptions& options);

// max over j of |g_j| where y_j > 0 and of max(0, -g_j) where y_j = 0.
double ProjectedGradientResidual(const Vec& y, const Vec& g);

}  // namespace bwshare::detail

#endif  // BWSHARE_DETAIL_DUAL_NEWTON_HPP
