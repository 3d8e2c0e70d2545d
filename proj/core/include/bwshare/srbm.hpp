#ifndef BWSHARE_SRBM_HPP
#define BWSHARE_SRBM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bwshare/cone.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// Random stream used for the Gaussian increments (substream of Rng(seed)).
inline constexpr unsigned kSrbmNoiseStream = 0;

struct SrbmOptions {
  // Keep every k-th step (step 0 and the last step are always kept).
  std::size_t record_every = 1;
  bool record = true;
  // Projected Gauss-Seidel for the per-step complementarity problem.
  double lcp_tolerance = 1e-10;
  int lcp_max_sweeps = 10000;
  // Pushing on face j counts as "away from the face" when the pre-step Q_j
  // exceeds push_threshold * sqrt(h).
  double push_threshold = 3.0;
  // Push against the within-step minimum of each coordinate (sampled from
  // its Brownian bridge given the endpoint) instead of the endpoint alone.
  // Exact in one dimension; removes the O(sqrt(h)) bias of plain projection.
  bool bridge_correction = true;
};

// Columns are grid points; rows are faces / resources.
struct SrbmPath {
  std::vector<double> times;
  Mat W;
  Mat Q;
  Mat U;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  // Total pushing per face, and the part applied while the pre-step Q_j was
  // above push_threshold * sqrt(h).
  Vec push_total;
  Vec push_away;
  Vec final_Q;
};

// Called after every step with the time and the new Q.
using SrbmObserver = std::function<void(double t, const Vec& q)>;

// Euler scheme in dual coordinates Q = G^-1 W:
//   q' = q + G^-1 theta h + G^-1 chol(Gamma) sqrt(h) z,
// then the LCP  m + G^-1 du >= 0, du >= 0, du . (m + G^-1 du) = 0 and
// q'' = q' + G^-1 du. Here m = q' without bridge correction, otherwise m_j
// is the sampled minimum of coordinate j over the step (m <= q').
// Throws Error{kNotInCone} for w0 outside the cone, Error{kLcpNotConverged}.
SrbmPath SimulateSrbm(const ConeGeometry& geom, const Vec& w0, double horizon,
                      double h, std::uint64_t seed, const SrbmOptions& options = {},
                      const SrbmObserver& observer = {});

// Solves q + M du >= 0, du >= 0, complementary, for M with positive diagonal
// by projected Gauss-Seidel. Returns du; throws Error{kLcpNotConverged}.
Vec SolveOrthantLcp(const Mat& M, const Vec& q, double tolerance = 1e-10,
                    int max_sweeps = 10000);

struct ProductFormOptions {
  double burn_in = 0.1;
  int batches = 20;
  int bins = 10;  // per dimension, for the log-density regression
};

struct ProductFormReport {
  std::size_t samples = 0;
  Vec mean;
  Vec expected_mean;  // 1 / (-theta_j)
  Vec half_width;
  Vec ks;  // sup distance of each Q_j marginal to Exp(-theta_j)
  Mat correlation;
  Mat correlation_half_width;
  // Exponent v recovered from a weighted log-linear fit of the Q histogram,
  // mapped back to workload coordinates; NaN when J > 3.
  Vec v_estimate;
  double v_relative_error = 0.0;
};

// Pools the recorded samples of one or more paths after burn-in. Batches are
// spread over the paths (at least one per path). Throws
// Error{kNotApplicable} unless unit weights and theta < 0,
// Error{kTooFewBatches} if fewer than 20 batches can be formed.
ProductFormReport ValidateProductForm(const ConeGeometry& geom,
                                      const std::vector<SrbmPath>& paths,
                                      const ProductFormOptions& options = {});

}  // namespace bwshare

#endif  // BWSHARE_SRBM_HPP
