#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bwshare/cone.hpp"
#include "bwshare/detail/simplex.hpp"
#include "bwshare/error.hpp"
#include "fixtures.hpp"

using namespace bwshare;
using namespace bwshare::testing;

namespace {

double MaxAbs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Grid search over the simplex for x >= 0 with D x > 0 (D is 2x2 or 3x3).
bool GridFindsPositive(const Mat& D) {
  const int n = static_cast<int>(D.rows());
  const int steps = 200;
  Vec x(n);
  if (n == 1) return D(0, 0) > 0.0;
  for (int a = 0; a <= steps; ++a) {
    if (n == 2) {
      x << a, steps - a;
      if (((D * x).array() > 0.0).all()) return true;
      continue;
    }
    for (int b = 0; a + b <= steps; ++b) {
      x << a, b, steps - a - b;
      if (((D * x).array() > 0.0).all()) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("linear network geometry") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  CHECK(MaxAbs(g.G - M({{1, 0.5}, {0.5, 1}})) < 1e-15);
  CHECK(MaxAbs(g.G_inv - M({{4.0 / 3, -2.0 / 3}, {-2.0 / 3, 4.0 / 3}})) < 1e-14);
  CHECK(MaxAbs(g.Gamma - M({{2, 1}, {1, 2}})) < 1e-15);
  CHECK(MaxAbs(g.v - V({-2.0 / 3, -2.0 / 3})) < 1e-14);
  CHECK(g.unit_weights);
  CHECK(MaxAbs(g.B - V({0.5, 0.5, 0.5})) == 0.0);
}

TEST_CASE("one-dimensional geometry") {
  NetworkSpec s;
  s.A = M({{1}});
  s.C = V({1});
  s.nu = s.mu = s.kappa = V({1});
  s.alpha = 1.0;
  const ConeGeometry g = BuildGeometry(s, V({-0.5}));
  CHECK(g.G(0, 0) == 1.0);
  CHECK(g.Gamma(0, 0) == 2.0);
  CHECK(InCone(g, V({3.0})));
  CHECK_FALSE(InCone(g, V({-1.0})));
  CHECK(SkewSymmetry(g).norm == 0.0);
}

TEST_CASE("geometry errors") {
  CHECK_THROWS_AS(BuildGeometry(CriticalLinear(2.0), V({-1, -1})), Error);
  CHECK_THROWS_AS(BuildGeometry(CriticalLinear(), V({-1})), Error);
  try {
    BuildGeometry(CriticalLinear(0.5), V({-1, -1}));
    FAIL("expected NotApplicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotApplicable);
  }
}

TEST_CASE("geometry invariants on random networks") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int J = 2 + trial % 4;
    const bool unit = trial % 2 == 0;
    const NetworkSpec spec = RandomNetwork(gen, J, 2, 1.0, unit);
    Vec theta(J);
    for (int j = 0; j < J; ++j) theta[j] = -u(gen);
    const ConeGeometry g = BuildGeometry(spec, theta);
    CHECK(MaxAbs(g.G * g.G_inv - Mat::Identity(J, J)) < 1e-12);
    CHECK(MaxAbs(g.G - g.G.transpose()) < 1e-14);
    // Gamma recomputed entrywise.
    for (int a = 0; a < J; ++a) {
      for (int b = 0; b < J; ++b) {
        double acc = 0.0;
        for (int i = 0; i < spec.A.cols(); ++i) {
          acc += spec.A(a, i) * spec.A(b, i) * spec.nu[i] / (spec.mu[i] * spec.mu[i]);
        }
        CHECK(g.Gamma(a, b) == doctest::Approx(2.0 * acc).epsilon(1e-13));
      }
    }
    if (unit) CHECK(MaxAbs(2.0 * g.G - g.Gamma) < 1e-12);
    CHECK(CompletelySCheck(g.G_inv).holds);
    // Membership round trip.
    Vec q(J);
    for (int j = 0; j < J; ++j) q[j] = u(gen);
    CHECK(InCone(g, g.G * q));
    q[trial % J] = -0.5;
    CHECK_FALSE(InCone(g, g.G * q));
  }
}

TEST_CASE("face distance") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  CHECK(FaceDistance(g, V({1, 1}), 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(FaceDistance(g, V({2, 2}), 0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
  const Vec on_face = g.G * V({0, 1.3});
  CHECK(FaceDistance(g, on_face, 0) < 1e-14);
  CHECK(FaceDistance(g, on_face, 1) > 0.1);
  CHECK_THROWS_AS(FaceDistance(g, V({1, 0.1}), 0), Error);
  CHECK_THROWS_AS(FaceDistance(g, V({1, 1}), 2), Error);
}

TEST_CASE("completely-S examples") {
  const CompletelySResult neg = CompletelySCheck(M({{-1}}));
  CHECK_FALSE(neg.holds);
  CHECK(neg.witness == std::vector<std::size_t>{0});
  CHECK(CompletelySCheck(Mat::Identity(4, 4)).holds);
  const CompletelySResult pair = CompletelySCheck(M({{1, -2}, {-2, 1}}));
  CHECK_FALSE(pair.holds);
  CHECK(pair.witness == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(CompletelySCheck(Mat::Identity(13, 13)), Error);
  CHECK_THROWS_AS(CompletelySCheck(Mat::Identity(2, 3)), Error);
}

TEST_CASE("feasibility solver agrees with a grid search") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 2;
    Mat D(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) D(a, b) = u(gen);
    }
    const auto x = detail::FindNonnegativeSolution(D, Vec::Ones(n));
    if (x) {
      CHECK((x->array() >= 0.0).all());
      CHECK(((D * *x).array() >= 1.0 - 1e-9).all());
    } else {
      CHECK_FALSE(GridFindsPositive(D));
    }
  }
}

TEST_CASE("skew symmetry") {
  const SkewSymmetryReport r = SkewSymmetry(BuildGeometry(CriticalLinear(), V({-1, -1})));
  CHECK(r.norm < 1e-10);
  // Normals are unit, reflections have unit normal component.
  for (int j = 0; j < 2; ++j) {
    CHECK(r.Theta.row(j).norm() == doctest::Approx(1.0));
    CHECK(r.Theta.row(j).dot(r.R.col(j)) == doctest::Approx(1.0));
    CHECK(std::abs((r.Theta * r.Xi.transpose())(j, j)) < 1e-12);
  }

  NetworkSpec weighted = CriticalLinear();
  weighted.kappa = V({1, 1, 4});
  CHECK(SkewSymmetry(BuildGeometry(weighted, V({-1, -1}))).norm > 1e-3);

  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int J = 2 + trial % 4;
    const NetworkSpec spec = RandomNetwork(gen, J, 3, 1.0, true);
    CHECK(SkewSymmetry(BuildGeometry(spec, -Vec::Ones(J))).norm < 1e-10);
  }
}

TEST_CASE("product form density") {
  const ConeGeometry g = BuildGeometry(CriticalLinear(), V({-1, -1}));
  CHECK(ProductFormDensity(g, V({0, 0})) == 1.0);
  CHECK(ProductFormDensity(g, V({1, 1})) == doctest::Approx(std::exp(-4.0 / 3)).epsilon(1e-14));
  CHECK(std::exp(-4.0 / 3) == doctest::Approx(0.26360).epsilon(1e-4));
  // In q coordinates the exponent is theta . q.
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkSpec spec = RandomNetwork(gen, 3, 2, 1.0, true);
    const Vec theta = V({-u(gen), -u(gen), -u(gen)});
    const ConeGeometry geom = BuildGeometry(spec, theta);
    const Vec q = V({u(gen), u(gen), u(gen)});
    CHECK(std::log(ProductFormDensity(geom, geom.G * q)) ==
          doctest::Approx(theta.dot(q)).epsilon(1e-10));
  }
  NetworkSpec weighted = CriticalLinear();
  weighted.kappa = V({1, 1, 4});
  CHECK_THROWS_AS(ProductFormDensity(BuildGeometry(weighted, V({-1, -1})), V({1, 1})), Error);
  CHECK_THROWS_AS(ProductFormDensity(g, V({1, 0.1})), Error);
}

TEST_CASE("wedge slopes") {
  const WedgeSlopes unit = ComputeWedgeSlopes(UnitLinear());
  CHECK(unit.beta_up == doctest::Approx(2.0));
  CHECK(unit.beta_low == doctest::Approx(2.0));

  // Equal weights: independent of alpha.
  const Vec nu = V({0.3, 0.7, 0.4});
  const Vec mu = V({1.5, 0.8, 1.1});
  NetworkSpec base = LinearNetwork(2, nu, mu, Vec::Constant(3, 2.5), 1.0, V({1, 1}));
  const WedgeSlopes s1 = ComputeWedgeSlopes(base);
  for (double alpha : {0.5, 2.0, 7.0}) {
    base.alpha = alpha;
    const WedgeSlopes s = ComputeWedgeSlopes(base);
    CHECK(s.beta_up == doctest::Approx(s1.beta_up).epsilon(1e-14));
    CHECK(s.beta_low == doctest::Approx(s1.beta_low).epsilon(1e-14));
  }
  // Unequal weights: tends to the equal-weight values as alpha grows.
  NetworkSpec w = LinearNetwork(2, nu, mu, V({1, 3, 9}), 1.0, V({1, 1}));
  double prev = std::abs(ComputeWedgeSlopes(w).beta_up - s1.beta_up);
  for (double alpha : {10.0, 100.0, 1000.0}) {
    w.alpha = alpha;
    const double gap = std::abs(ComputeWedgeSlopes(w).beta_up - s1.beta_up);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-2);

  // alpha = 1: slopes equal the face-normal slopes.
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkSpec spec = LinearNetwork(2, V({u(gen), u(gen), u(gen)}),
                                           V({u(gen), u(gen), u(gen)}),
                                           V({u(gen), u(gen), u(gen)}), 1.0, V({1, 1}));
    const ConeGeometry g = BuildGeometry(spec, V({-1, -1}));
    const WedgeSlopes s = ComputeWedgeSlopes(spec);
    CHECK(s.beta_up == doctest::Approx(-g.normals(0, 0) / g.normals(0, 1)).epsilon(1e-10));
    CHECK(s.beta_low == doctest::Approx(-g.normals(1, 1) / g.normals(1, 0)).epsilon(1e-10));
  }

  NetworkSpec bad = CriticalLinear();
  bad.A = M({{1, 1, 0}, {0, 1, 1}});
  CHECK_THROWS_AS(ComputeWedgeSlopes(bad), Error);
}
