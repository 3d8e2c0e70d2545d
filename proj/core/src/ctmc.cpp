#include "bwshare/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "bwshare/alloc.hpp"
#include "bwshare/error.hpp"
#include "bwshare/fluid.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "ctmc";
constexpr std::size_t kMaxCachedStates = 2'000'000;

struct CountsHash {
  std::size_t operator()(const Counts& n) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(n[i])) +
           0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct CountsEqual {
  bool operator()(const Counts& a, const Counts& b) const { return a == b; }
};

class AllocationCache {
 public:
  explicit AllocationCache(const NetworkSpec& spec) : spec_(spec) {}

  const Vec& Get(const Counts& n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= kMaxCachedStates) cache_.clear();
    AllocateOptions opts;
    if (last_p_.size() > 0) opts.initial_p = last_p_;
    const AllocationResult r = Allocate(spec_, n.cast<double>(), opts);
    if (r.p.allFinite() && (r.p.array() > 0.0).any()) last_p_ = r.p;
    return cache_.emplace(n, r.lambda).first->second;
  }

 private:
  const NetworkSpec& spec_;
  std::unordered_map<Counts, Vec, CountsHash, CountsEqual> cache_;
  Vec last_p_;
};

double TQuantile975(int dof) {
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

}  // namespace

Counts PathSample::StateAt(double t) const {
  if (event_times.empty()) {
    throw Error(kModule, ErrorCode::kHorizonTooShort, "path has no recorded states");
  }
  if (t < 0.0 || t > covered * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time " << t << " outside the simulated range [0, " << covered << "]";
    throw Error(kModule, ErrorCode::kHorizonTooShort, os.str());
  }
  const auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
  return states[static_cast<std::size_t>(it - event_times.begin()) - 1];
}

PathSample Simulate(const NetworkSpec& spec, const Counts& n0, double horizon,
                    std::uint64_t seed, const SimulateOptions& options,
                    const IntervalObserver& observer) {
  ValidateNetwork(spec);
  const Eigen::Index I = spec.A.cols();
  if (n0.size() != I) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "n0 must have one entry per route");
  }
  if ((n0.array() < 0).any()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "n0 must be nonnegative");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(kModule, ErrorCode::kHorizonTooShort, "horizon must be positive and finite");
  }

  const Rng root(seed);
  Rng holding = root.Substream(kHoldingStream);
  Rng selection = root.Substream(kSelectionStream);
  AllocationCache cache(spec);

  PathSample path;
  path.routes = static_cast<std::size_t>(I);
  path.seed = seed;
  path.horizon = horizon;
  path.arrivals.assign(path.routes, 0);
  path.departures.assign(path.routes, 0);

  Counts n = n0;
  Vec T = Vec::Zero(I);
  const double arrival_total = spec.nu.sum();
  double t = 0.0;
  const Vec* lambda = &cache.Get(n);
  if (options.record) {
    path.event_times.push_back(0.0);
    path.states.push_back(n);
    path.allocations.push_back(*lambda);
    path.cumulative_T.push_back(T);
  }
  Vec departure_rate(I);
  for (;;) {
    departure_rate = spec.mu.cwiseProduct(*lambda);
    for (Eigen::Index i = 0; i < I; ++i) {
      if (n[i] == 0) departure_rate[i] = 0.0;
    }
    const double total = arrival_total + departure_rate.sum();
    const double next = t + holding.Exponential(total);
    const double t1 = std::min(next, horizon);
    if (observer) observer(Interval{t, t1, n, *lambda});
    T += (t1 - t) * *lambda;
    if (next >= horizon) {
      t = horizon;
      path.covered = horizon;
      break;
    }
    if (options.max_events > 0 && path.events >= options.max_events) {
      t = next;
      path.covered = next;
      path.truncated = true;
      break;
    }
    t = next;

    // Pick the event: arrivals first, then departures, proportional to rate.
    double u = selection.UniformOpen() * total;
    Eigen::Index chosen = -1;
    bool arrival = true;
    for (Eigen::Index i = 0; i < I && chosen < 0; ++i) {
      if (u < spec.nu[i]) chosen = i;
      u -= spec.nu[i];
    }
    if (chosen < 0) {
      arrival = false;
      Eigen::Index last_positive = -1;
      for (Eigen::Index i = 0; i < I && chosen < 0; ++i) {
        if (departure_rate[i] <= 0.0) continue;
        last_positive = i;
        if (u < departure_rate[i]) chosen = i;
        u -= departure_rate[i];
      }
      if (chosen < 0) chosen = last_positive;  // rounding at the top end
      if (chosen < 0) {
        arrival = true;
        chosen = I - 1;
      }
    }
    const auto c = static_cast<std::size_t>(chosen);
    if (arrival) {
      ++n[chosen];
      ++path.arrivals[c];
    } else {
      --n[chosen];
      ++path.departures[c];
    }
    ++path.events;
    lambda = &cache.Get(n);
    if (options.record) {
      path.event_times.push_back(t);
      path.states.push_back(n);
      path.allocations.push_back(*lambda);
      path.cumulative_T.push_back(T);
    }
  }
  path.final_state = n;
  return path;
}

ScaledPath ScalePath(const NetworkSpec& spec, const PathSample& path, double r,
                     ScaleMode mode, double T, double dt) {
  if (!(r > 0.0) || !(T >= 0.0) || !(dt > 0.0)) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "r and dt must be positive, T nonnegative");
  }
  if (static_cast<Eigen::Index>(path.routes) != spec.A.cols()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "path and spec disagree on routes");
  }
  const double time_factor = mode == ScaleMode::kFluid ? r : r * r;
  const double needed = time_factor * T;
  if (path.covered < needed * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "path covers " << path.covered << " but scaling needs " << needed;
    throw Error(kModule, ErrorCode::kHorizonTooShort, os.str());
  }
  const auto K = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  const Mat workload_map = spec.A * spec.mu.cwiseInverse().asDiagonal();
  ScaledPath out;
  out.times.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double s = static_cast<double>(k) * dt;
    const double real_time = std::min(time_factor * s, path.covered);
    const Vec N = path.StateAt(real_time).cast<double>() / r;
    out.times.push_back(s);
    out.W.push_back(workload_map * N);
    out.N.push_back(N);
  }
  return out;
}

double SscStatistic(const NetworkSpec& spec, const ScaledPath& scaled) {
  double num = 0.0;
  double den = 1.0;
  for (std::size_t k = 0; k < scaled.N.size(); ++k) {
    const Vec& N = scaled.N[k];
    den = std::max(den, N.norm());
    const Vec w = scaled.W[k].cwiseMax(0.0);
    num = std::max(num, (N - LiftDelta(spec, w)).norm());
  }
  return num / den;
}

double SimulateSsc(const NetworkSpec& base, const Vec& theta, double r, double T,
                   double dt, std::uint64_t seed, std::uint64_t max_events) {
  const NetworkSpec net = HeavyTrafficNetwork(base, theta, r);
  SimulateOptions opts;
  opts.max_events = max_events;
  const PathSample path =
      Simulate(net, Counts::Zero(net.A.cols()), r * r * T, seed, opts);
  return SscStatistic(base, ScalePath(net, path, r, ScaleMode::kDiffusion, T, dt));
}

StationaryAccumulator::StationaryAccumulator(std::size_t routes, double horizon,
                                             const StationaryOptions& options)
    : routes_(routes), options_(options) {
  if (options.batches < 20) {
    throw Error(kModule, ErrorCode::kTooFewBatches, "at least 20 batches are required");
  }
  if (!(options.burn_in >= 0.0 && options.burn_in < 1.0) || !(horizon > 0.0)) {
    throw Error(kModule, ErrorCode::kHorizonTooShort,
                "need horizon > 0 and burn-in fraction in [0, 1)");
  }
  if (options.histogram_max < 1) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "histogram_max must be positive");
  }
  start_ = options.burn_in * horizon;
  end_ = horizon;
  batch_length_ = (end_ - start_) / options.batches;
  const auto I = static_cast<Eigen::Index>(routes);
  sum_ = Vec::Zero(I);
  cross_ = Mat::Zero(I, I);
  batch_sum_.assign(static_cast<std::size_t>(options.batches), Vec::Zero(I));
  histogram_.assign(routes, std::vector<double>(static_cast<std::size_t>(options.histogram_max) + 1, 0.0));
  if (options.joint_box >= 0) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < routes; ++i) size *= static_cast<std::size_t>(options.joint_box) + 1;
    joint_.assign(size, 0.0);
  }
}

void StationaryAccumulator::Add(double t0, double t1, const Counts& n) {
  double a = std::max(t0, start_);
  const double b = std::min(t1, end_);
  while (a < b) {
    int batch = static_cast<int>((a - start_) / batch_length_);
    batch = std::clamp(batch, 0, options_.batches - 1);
    const double batch_end =
        batch == options_.batches - 1 ? end_ : start_ + (batch + 1) * batch_length_;
    const double c = std::min(b, batch_end);
    if (c <= a) {
      // Rounding left a at a batch boundary; move to the next batch.
      a = std::nextafter(a, end_);
      continue;
    }
    AddWithinBatch(c - a, batch, n);
    a = c;
  }
}

void StationaryAccumulator::AddWithinBatch(double dt, int batch, const Counts& n) {
  const Vec x = n.cast<double>();
  sum_ += dt * x;
  cross_.noalias() += dt * x * x.transpose();
  batch_sum_[static_cast<std::size_t>(batch)] += dt * x;
  total_ += dt;
  const int top = options_.histogram_max;
  for (std::size_t i = 0; i < routes_; ++i) {
    const int k = std::min(n[static_cast<Eigen::Index>(i)], top);
    histogram_[i][static_cast<std::size_t>(k)] += dt;
  }
  if (options_.joint_box >= 0) {
    std::size_t index = 0;
    std::size_t stride = 1;
    bool inside = true;
    for (std::size_t i = 0; i < routes_; ++i) {
      const int k = n[static_cast<Eigen::Index>(i)];
      if (k > options_.joint_box) {
        inside = false;
        break;
      }
      index += static_cast<std::size_t>(k) * stride;
      stride *= static_cast<std::size_t>(options_.joint_box) + 1;
    }
    if (inside) joint_[index] += dt;
  }
}

StationaryEstimate StationaryAccumulator::Finish() const {
  if (!(total_ > 0.0)) {
    throw Error(kModule, ErrorCode::kHorizonTooShort, "no time observed after burn-in");
  }
  StationaryEstimate e;
  e.burn_in = options_.burn_in;
  e.batches = options_.batches;
  e.mean = sum_ / total_;
  const Mat second = cross_ / total_;
  const auto I = static_cast<Eigen::Index>(routes_);
  e.variance.resize(I);
  for (Eigen::Index i = 0; i < I; ++i) {
    e.variance[i] = std::max(0.0, second(i, i) - e.mean[i] * e.mean[i]);
  }
  e.correlation = Mat::Identity(I, I);
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index k = 0; k < I; ++k) {
      if (i == k) continue;
      const double denom = std::sqrt(e.variance[i] * e.variance[k]);
      e.correlation(i, k) =
          denom > 0.0 ? (second(i, k) - e.mean[i] * e.mean[k]) / denom : 0.0;
    }
  }
  const int B = options_.batches;
  Vec batch_mean_sum = Vec::Zero(I);
  Vec batch_mean_sq = Vec::Zero(I);
  for (const Vec& s : batch_sum_) {
    const Vec m = s / batch_length_;
    batch_mean_sum += m;
    batch_mean_sq += m.cwiseProduct(m);
  }
  const Vec bm = batch_mean_sum / B;
  const double t = TQuantile975(B - 1);
  e.half_width.resize(I);
  for (Eigen::Index i = 0; i < I; ++i) {
    const double var = std::max(0.0, (batch_mean_sq[i] - B * bm[i] * bm[i]) / (B - 1));
    e.half_width[i] = t * std::sqrt(var / B);
  }
  e.histogram = histogram_;
  for (auto& h : e.histogram) {
    for (double& v : h) v /= total_;
  }
  e.joint_box_mass = joint_;
  for (double& v : e.joint_box_mass) v /= total_;
  return e;
}

StationaryEstimate EstimateStationary(const PathSample& path,
                                      const StationaryOptions& options) {
  if (path.event_times.empty()) {
    throw Error(kModule, ErrorCode::kHorizonTooShort, "path has no recorded states");
  }
  StationaryAccumulator acc(path.routes, path.covered, options);
  for (std::size_t k = 0; k < path.event_times.size(); ++k) {
    const double t1 = k + 1 < path.event_times.size() ? path.event_times[k + 1] : path.covered;
    acc.Add(path.event_times[k], t1, path.states[k]);
  }
  return acc.Finish();
}

ExactLinearLaw::ExactLinearLaw(double rho0, const Vec& rho) : rho0_(rho0), rho_(rho) {
  if (rho.size() == 0) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "need at least one resource");
  }
  if (!(rho0 >= 0.0) || !(rho.array() >= 0.0).all() || !rho.allFinite()) {
    throw Error(kModule, ErrorCode::kNonPositiveParameter, "loads must be nonnegative");
  }
  log_norm_ = -(static_cast<double>(rho.size()) - 1.0) * std::log(1.0 - rho0);
  for (Eigen::Index j = 0; j < rho.size(); ++j) {
    if (!(rho0 + rho[j] < 1.0)) {
      std::ostringstream os;
      os << "rho0 + rho_" << j << " = " << rho0 + rho[j] << " is not below 1";
      throw Error(kModule, ErrorCode::kStabilityViolated, os.str());
    }
    log_norm_ += std::log(1.0 - rho0 - rho[j]);
  }
}

double ExactLinearLaw::JointPmf(const Counts& n) const {
  const Eigen::Index J = rho_.size();
  if (n.size() != J + 1) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "need J + 1 counts");
  }
  if ((n.array() < 0).any()) return 0.0;
  double log_p = log_norm_;
  long total = 0;
  auto term = [&](int k, double rho) {
    if (k == 0) return 0.0;
    return k * std::log(rho);  // -inf when rho == 0
  };
  for (Eigen::Index j = 0; j < J; ++j) {
    total += n[j];
    log_p += term(n[j], rho_[j]);
  }
  const int n0 = n[J];
  total += n0;
  log_p += term(n0, rho0_);
  log_p += std::lgamma(static_cast<double>(total) + 1.0) - std::lgamma(n0 + 1.0) -
           std::lgamma(static_cast<double>(total - n0) + 1.0);
  return std::exp(log_p);
}

double ExactLinearLaw::MarginalPmf(std::size_t j, int k) const {
  const auto jj = static_cast<Eigen::Index>(j);
  if (jj >= rho_.size()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "route index out of range");
  }
  if (k < 0) return 0.0;
  const double ratio = rho_[jj] / (1.0 - rho0_);
  return (1.0 - ratio) * std::pow(ratio, k);
}

double ExactLinearLaw::MarginalMean(std::size_t j) const {
  const auto jj = static_cast<Eigen::Index>(j);
  if (jj >= rho_.size()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "route index out of range");
  }
  return rho_[jj] / (1.0 - rho0_ - rho_[jj]);
}

Vec StationaryApproximation::Sample(Rng& rng) const {
  Vec q(q_rate.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = rng.Exponential(q_rate[j]);
  return weights * q;
}

StationaryApproximation ApproximateStationary(const NetworkSpec& spec) {
  ValidateNetwork(spec);
  const Vec slack = spec.C - spec.load();
  for (Eigen::Index j = 0; j < slack.size(); ++j) {
    if (!(slack[j] > 0.0)) {
      std::ostringstream os;
      os << "resource " << j << " has no spare capacity (C - A rho = " << slack[j] << ")";
      throw Error(kModule, ErrorCode::kNotSubcritical, os.str());
    }
  }
  StationaryApproximation a;
  a.q_rate = slack;
  a.weights = spec.rho().asDiagonal() * spec.A.transpose();
  a.mean = a.weights * slack.cwiseInverse();
  return a;
}

}  // namespace bwshare
