#ifndef BWSHARE_CTMC_HPP
#define BWSHARE_CTMC_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/rng.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

using Counts = Eigen::VectorXi;

// Random streams used by the simulator, as substreams of Rng(seed):
// substream 0 draws holding times, substream 1 selects the event.
inline constexpr unsigned kHoldingStream = 0;
inline constexpr unsigned kSelectionStream = 1;

struct SimulateOptions {
  // Stop after this many events (0 = no limit); the path is then marked
  // truncated and covers [0, covered).
  std::uint64_t max_events = 0;
  // Keep per-event records. Streaming callers can turn this off.
  bool record = true;
};

// One holding interval [t0, t1) in state n with allocation lambda.
struct Interval {
  double t0;
  double t1;
  const Counts& n;
  const Vec& lambda;
};
using IntervalObserver = std::function<void(const Interval&)>;

struct PathSample {
  std::size_t routes = 0;
  // Entry 0 is the initial state at t = 0; entry k > 0 the state entered at
  // the k-th event. allocations[k] and cumulative_T[k] refer to the same
  // instant (T at event_times[k], Lambda of the state entered there).
  std::vector<double> event_times;
  std::vector<Counts> states;
  std::vector<Vec> allocations;
  std::vector<Vec> cumulative_T;
  std::vector<std::int64_t> arrivals;    // totals per route
  std::vector<std::int64_t> departures;  // totals per route
  Counts final_state;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  double r = 1.0;
  double horizon = 0.0;
  double covered = 0.0;  // equals horizon unless truncated
  bool truncated = false;

  // State at time t in [0, covered]; requires recorded events.
  Counts StateAt(double t) const;
};

// Exact simulation of the flow-level chain: arrivals on route i at rate nu_i,
// departures at rate mu_i Lambda_i(n). Allocations are cached per state.
// Deterministic given the seed. Throws Error{kHorizonTooShort} for
// horizon <= 0; propagates allocation errors.
PathSample Simulate(const NetworkSpec& spec, const Counts& n0, double horizon,
                    std::uint64_t seed, const SimulateOptions& options = {},
                    const IntervalObserver& observer = {});

enum class ScaleMode { kFluid, kDiffusion };

struct ScaledPath {
  std::vector<double> times;  // uniform grid 0, dt, ..., T
  std::vector<Vec> N;
  std::vector<Vec> W;  // A M^-1 N at each grid point
};

// Fluid: N(r t) / r; diffusion: N(r^2 t) / r, on [0, T] with spacing dt.
// Throws Error{kHorizonTooShort} if the path does not cover r T (fluid) or
// r^2 T (diffusion).
ScaledPath ScalePath(const NetworkSpec& spec, const PathSample& path, double r,
                     ScaleMode mode, double T, double dt);

// sup_t |N(t) - Delta(W(t))| / max(sup_t |N(t)|, 1) over the grid, with the
// lifting map of spec.
double SscStatistic(const NetworkSpec& spec, const ScaledPath& scaled);

// Heavy-traffic run: simulates HeavyTrafficNetwork(base, theta, r) from the
// empty state over r^2 T and returns the statistic against base.
double SimulateSsc(const NetworkSpec& base, const Vec& theta, double r, double T,
                   double dt, std::uint64_t seed, std::uint64_t max_events = 0);

struct StationaryOptions {
  double burn_in = 0.2;  // fraction of the horizon discarded
  int batches = 20;      // at least 20
  // Marginal histograms cover 0..histogram_max - 1; the last bin holds the
  // mass at histogram_max and above.
  int histogram_max = 64;
  // If >= 0, also record the joint mass of every state with all counts
  // <= joint_box (index sum_i n_i (joint_box + 1)^i).
  int joint_box = -1;
};

struct StationaryEstimate {
  Vec mean;
  Vec variance;
  Vec half_width;  // 95% batch-means half-width of the mean
  std::vector<std::vector<double>> histogram;
  Mat correlation;
  std::vector<double> joint_box_mass;
  double burn_in = 0.0;
  int batches = 0;
};

// Time-weighted estimator fed with holding intervals, for streaming use.
// Throws Error{kTooFewBatches} if options.batches < 20 and
// Error{kHorizonTooShort} if the window after burn-in is empty.
class StationaryAccumulator {
 public:
  StationaryAccumulator(std::size_t routes, double horizon,
                        const StationaryOptions& options = {});
  void Add(double t0, double t1, const Counts& n);
  void operator()(const Interval& iv) { Add(iv.t0, iv.t1, iv.n); }
  StationaryEstimate Finish() const;

 private:
  void AddWithinBatch(double dt, int batch, const Counts& n);

  std::size_t routes_;
  double start_;
  double end_;
  double batch_length_;
  StationaryOptions options_;
  Vec sum_;
  Mat cross_;
  std::vector<Vec> batch_sum_;
  std::vector<std::vector<double>> histogram_;
  std::vector<double> joint_;
  double total_ = 0.0;
};

StationaryEstimate EstimateStationary(const PathSample& path,
                                      const StationaryOptions& options = {});

// Exact stationary law of the linear network with unit capacities,
// proportional fairness and unit weights. Counts are ordered as in
// LinearNetwork: n[0..J-1] on the single-resource routes, n[J] on the long
// route (load rho0).
class ExactLinearLaw {
 public:
  // Throws Error{kStabilityViolated} unless rho0 + rho_j < 1 for all j,
  // Error{kNonPositiveParameter} for negative loads.
  ExactLinearLaw(double rho0, const Vec& rho);

  std::size_t resources() const { return static_cast<std::size_t>(rho_.size()); }
  double JointPmf(const Counts& n) const;
  // Geometric law of the single-resource route j.
  double MarginalPmf(std::size_t j, int k) const;
  double MarginalMean(std::size_t j) const;

 private:
  double rho0_;
  Vec rho_;
  double log_norm_;
};

// N_i ~ rho_i sum_j A_ji Q_j with independent Q_j ~ Exp(C_j - (A rho)_j).
struct StationaryApproximation {
  Vec q_rate;
  Vec mean;
  Mat weights;  // diag(rho) A'

  Vec Sample(Rng& rng) const;
};

// Throws Error{kNotSubcritical} unless C - A rho > 0.
StationaryApproximation ApproximateStationary(const NetworkSpec& spec);

}  // namespace bwshare

#endif  // BWSHARE_CTMC_HPP
