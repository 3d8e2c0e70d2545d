#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bwshare/ctmc.hpp"
#include "bwshare/error.hpp"
#include "bwshare/srbm.hpp"
#include "fixtures.hpp"

using namespace bwshare;
using namespace bwshare::testing;

namespace {

NetworkSpec OneResource() {
  NetworkSpec s;
  s.A = M({{1}});
  s.C = V({1});
  s.nu = s.mu = s.kappa = V({1});
  s.alpha = 1.0;
  return s;
}

// Brute-force LCP oracle for tiny systems: try every complementary basis.
Vec EnumerateLcp(const Mat& M, const Vec& q) {
  const Eigen::Index n = q.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<Eigen::Index> on;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) on.push_back(j);
    }
    Vec du = Vec::Zero(n);
    if (!on.empty()) {
      const auto k = static_cast<Eigen::Index>(on.size());
      Mat Ms(k, k);
      Vec qs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        qs[a] = -q[on[a]];
        for (Eigen::Index b = 0; b < k; ++b) Ms(a, b) = M(on[a], on[b]);
      }
      const Vec x = Ms.lu().solve(qs);
      for (Eigen::Index a = 0; a < k; ++a) du[on[a]] = x[a];
    }
    const Vec y = q + M * du;
    if ((du.array() >= -1e-12).all() && (y.array() >= -1e-12).all()) return du;
  }
  return Vec::Constant(n, std::nan(""));
}

}  // namespace

TEST_CASE("orthant LCP matches enumeration") {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    Mat L(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) L(a, b) = z(gen);
    }
    const Mat M = L * L.transpose() + 0.5 * Mat::Identity(n, n);
    Vec q(n);
    for (int a = 0; a < n; ++a) q[a] = z(gen);
    const Vec du = SolveOrthantLcp(M, q);
    const Vec y = q + M * du;
    CHECK((du.array() >= 0.0).all());
    CHECK(y.minCoeff() >= -1e-9);
    CHECK(std::abs(du.dot(y)) < 1e-9);
    CHECK((du - EnumerateLcp(M, q)).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(SolveOrthantLcp(Mat::Identity(2, 2), V({1})), Error);
}

TEST_CASE("one-dimensional reflected Brownian motion") {
  const ConeGeometry g = BuildGeometry(OneResource(), V({-1}));
  SrbmOptions o;
  o.record_every = 10;
  const SrbmPath p = SimulateSrbm(g, V({0}), 1e4, 1e-3, 1, o);
  const double mean = p.W.row(0).mean();
  // Gamma / (2 |theta|) = 1.
  CHECK(std::abs(mean - 1.0) < 0.05);
}

TEST_CASE("path invariants") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({0, 0}));
  const SrbmPath p = SimulateSrbm(g, V({1, 1}), 20.0, 1e-3, 3);
  REQUIRE(p.Q.cols() == 20001);
  CHECK(p.times.front() == 0.0);
  CHECK(p.times.back() == doctest::Approx(20.0));
  CHECK(p.Q.minCoeff() >= 0.0);
  CHECK(p.U.col(0).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index c = 1; c < p.U.cols(); ++c) {
    CHECK((p.U.col(c).array() >= p.U.col(c - 1).array()).all());
  }
  CHECK((p.W - g.G * p.Q).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index c = 0; c < p.W.cols(); ++c) CHECK(InCone(g, p.W.col(c)));
  CHECK(p.U.col(p.U.cols() - 1).maxCoeff() > 0.0);
}

TEST_CASE("determinism and input errors") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  const SrbmPath a = SimulateSrbm(g, V({0, 0}), 5.0, 1e-2, 8);
  const SrbmPath b = SimulateSrbm(g, V({0, 0}), 5.0, 1e-2, 8);
  CHECK(a.Q == b.Q);
  CHECK_THROWS_AS(SimulateSrbm(g, V({1, 0.1}), 5.0, 1e-2, 8), Error);
  CHECK_THROWS_AS(SimulateSrbm(g, V({0, 0}), 5.0, 0.0, 8), Error);
  CHECK_THROWS_AS(SimulateSrbm(g, V({0}), 5.0, 1e-2, 8), Error);
}

TEST_CASE("pushing happens at the faces") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  std::vector<double> ratios;
  for (double h : {1e-2, 1e-3}) {
    SrbmOptions o;
    o.record = false;
    const SrbmPath p = SimulateSrbm(g, V({0, 0}), 2000.0, h, 12, o);
    for (Eigen::Index j = 0; j < 2; ++j) {
      REQUIRE(p.push_total[j] > 0.0);
      const double ratio = p.push_away[j] / p.push_total[j];
      CHECK(ratio < 0.05);
      ratios.push_back(ratio);
    }
  }
  // Brownian scaling makes the ratio roughly h-invariant: it must not grow.
  CHECK(ratios[2] < ratios[0] + 0.01);
  CHECK(ratios[3] < ratios[1] + 0.01);
}

TEST_CASE("dual variables are independent exponentials") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -2}));
  std::vector<SrbmPath> paths;
  SrbmOptions o;
  o.record_every = 10;
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    paths.push_back(SimulateSrbm(g, V({0, 0}), 5000.0, 1e-3, 60 + seed, o));
  }
  const ProductFormReport r = ValidateProductForm(g, paths);
  CHECK(r.expected_mean[0] == doctest::Approx(1.0));
  CHECK(r.expected_mean[1] == doctest::Approx(0.5));
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(std::abs(r.mean[j] - r.expected_mean[j]) <= 2.0 * r.half_width[j]);
    CHECK(r.ks[j] < 0.03);
  }
  CHECK(std::abs(r.correlation(0, 1)) < 0.05);
  CHECK(r.v_relative_error < 0.1);
}

TEST_CASE("marginal law with equal drifts") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  SrbmOptions o;
  o.record_every = 10;
  const std::vector<SrbmPath> paths{SimulateSrbm(g, V({0, 0}), 1e4, 1e-3, 71, o)};
  const ProductFormReport r = ValidateProductForm(g, paths);
  CHECK(r.ks[0] < 0.03);
  CHECK(std::abs(r.mean[0] - 1.0) < 0.05);
  CHECK(std::abs(r.mean[1] - 1.0) < 0.05);
}

TEST_CASE("product-form validation preconditions") {
  const ConeGeometry zero = BuildGeometry(CriticalLinear(), V({-1, 0}));
  const std::vector<SrbmPath> paths{SimulateSrbm(zero, V({0, 0}), 10.0, 1e-2, 1)};
  CHECK_THROWS_AS(ValidateProductForm(zero, paths), Error);
  NetworkSpec weighted = CriticalLinear();
  weighted.kappa = V({1, 1, 4});
  const ConeGeometry wg = BuildGeometry(weighted, V({-1, -1}));
  CHECK_THROWS_AS(ValidateProductForm(wg, {SimulateSrbm(wg, V({0, 0}), 10.0, 1e-2, 1)}), Error);
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  ProductFormOptions few;
  few.batches = 5;
  CHECK_THROWS_AS(ValidateProductForm(g, {SimulateSrbm(g, V({0, 0}), 10.0, 1e-2, 1)}, few), Error);
}

TEST_CASE("agreement with the scaled flow-level chain") {
  const NetworkSpec base = CriticalLinear();
  const Vec theta = V({-1, -1});
  const double r = 20.0;
  const NetworkSpec net = HeavyTrafficNetwork(base, theta, r);
  SimulateOptions so;
  so.record = false;
  const double horizon = 2e5;
  Vec workload = Vec::Zero(2);
  double total = 0.0;
  const double start = 0.1 * horizon;
  Simulate(net, Counts::Zero(3), horizon, 99, so, [&](const Interval& iv) {
    const double a = std::max(iv.t0, start);
    if (iv.t1 <= a) return;
    workload += (iv.t1 - a) * (net.A * iv.n.cast<double>().cwiseQuotient(net.mu));
    total += iv.t1 - a;
  });
  const Vec scaled = workload / total / r;
  const ConeGeometry g = BuildGeometry(base, theta);
  const Vec expected = g.G * theta.cwiseInverse().cwiseAbs();
  CHECK(((scaled - expected).cwiseQuotient(expected).cwiseAbs().array() < 0.15).all());
}
