#ifndef BWSHARE_CONE_HPP
#define BWSHARE_CONE_HPP

#include <cstddef>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// Workload cone {G q : q >= 0} of the alpha = 1 model, G = A B A' with
// B = diag(nu_i / (mu_i^2 kappa_i)). Equivalently {w : G^-1 w >= 0}, so the
// rows of G^-1 are inward face normals.
struct ConeGeometry {
  Mat A;
  Vec B;  // diagonal of B
  Mat G;
  Mat G_inv;
  Mat normals;  // row j is the inward normal of face j
  Mat Gamma;    // 2 A M^-1 diag(nu) M^-1 A'
  Vec theta;
  Vec v;  // 2 Gamma^-1 theta
  // kappa == 1 on every route; then G = Gamma / 2 and v is the exponent of
  // the product-form density.
  bool unit_weights = false;
};

// Throws Error{kNotApplicable} if alpha != 1, Error{kDimensionMismatch} for a
// theta of the wrong length, Error{kSingularG} if G is not numerically
// positive definite.
ConeGeometry BuildGeometry(const NetworkSpec& spec, const Vec& theta);

// True iff n^j . w >= -tol |n^j| for all faces j.
bool InCone(const ConeGeometry& geom, const Vec& w, double tol = 1e-9);

// Euclidean distance n^j . w / |n^j| from w to the hyperplane of face j.
// Throws Error{kNotInCone}.
double FaceDistance(const ConeGeometry& geom, const Vec& w, std::size_t j);

struct CompletelySResult {
  bool holds = true;
  // Indices (0-based) of a principal submatrix with no x >= 0, D x > 0.
  std::vector<std::size_t> witness;
};

// Checks every principal submatrix by a feasibility solve; dimension <= 12.
// Throws Error{kDimensionTooLarge}.
CompletelySResult CompletelySCheck(const Mat& M);

struct SkewSymmetryReport {
  Mat Theta;  // rows: unit inward normals after whitening
  Mat R;      // columns: reflection directions, unit normal component
  Mat Xi;     // R = Theta' + Xi'
  Mat residual;  // Theta Xi' + Xi Theta'
  double norm = 0.0;  // Frobenius norm of the residual
};

// Whitens the SRBM with V = D^-1/2 L where Gamma = L' D L, and tests the
// skew symmetry condition for the whitened normals and reflection
// directions (the unit vectors e_j in workload coordinates).
SkewSymmetryReport SkewSymmetry(const ConeGeometry& geom);

// exp(v . w) on the cone. Throws Error{kNotApplicable} unless unit weights,
// Error{kNotInCone}.
double ProductFormDensity(const ConeGeometry& geom, const Vec& w);

struct WedgeSlopes {
  double beta_up = 0.0;   // upper face w_2 = beta_up w_1
  double beta_low = 0.0;  // lower face w_1 = beta_low w_2
};

// Two resources, routes {1}, {2}, {1,2} in that order, any alpha.
// Throws Error{kTopologyMismatch}.
WedgeSlopes ComputeWedgeSlopes(const NetworkSpec& spec);

}  // namespace bwshare

#endif  // BWSHARE_CONE_HPP
