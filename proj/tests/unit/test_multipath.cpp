#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bwshare/alloc.hpp"
#include "bwshare/detail/simplex.hpp"
#include "bwshare/error.hpp"
#include "bwshare/multipath.hpp"
#include "fixtures.hpp"

using namespace bwshare;
using namespace bwshare::testing;

namespace {

MultipathSpec ParallelLinks() {
  MultipathSpec s;
  s.H = M({{1, 1}});
  s.Abar = M({{1, 0}, {0, 1}});
  s.Cbar = V({2, 3});
  return s;
}

// Pair 0 may use routes {0,2} or {1,3}, pair 1 routes {0} or {1}, pair 2
// route {2,3}; resources 2 and 3 share the small capacity c3.
MultipathSpec GeneralizedCut(double c1, double c2, double c3) {
  MultipathSpec s;
  s.H = M({{1, 1, 0, 0, 0}, {0, 0, 1, 1, 0}, {0, 0, 0, 0, 1}});
  s.Abar = M({{1, 0, 1, 0, 0}, {0, 1, 0, 1, 0}, {1, 0, 0, 0, 1}, {0, 1, 0, 0, 1}});
  s.Cbar = V({c1, c2, c3, c3});
  return s;
}

// Independent oracle: is Lambda = H y for some y >= 0 with Abar y <= Cbar?
bool InRegion(const MultipathSpec& s, const Vec& lambda, double slack = 1e-9) {
  const Eigen::Index I = s.H.rows(), K = s.H.cols(), L = s.Abar.rows();
  Mat sys(2 * I + L, K);
  sys << s.H, -s.H, -s.Abar;
  Vec rhs(2 * I + L);
  rhs << lambda.array() - slack, -lambda.array() - slack, -s.Cbar;
  return detail::FindNonnegativeSolution(sys, rhs).has_value();
}

MultipathSpec RandomMultipath(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pairs(1, 3), extra(0, 2), res(1, 4), cap(1, 6);
  std::bernoulli_distribution coin(0.5);
  MultipathSpec s;
  const int I = pairs(gen);
  const int K = I + extra(gen);
  const int L = res(gen);
  s.H = Mat::Zero(I, K);
  for (int k = 0; k < K; ++k) s.H(k < I ? k : std::uniform_int_distribution<int>(0, I - 1)(gen), k) = 1;
  s.Abar = Mat::Zero(L, K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) s.Abar(l, k) = coin(gen) ? 1 : 0;
    if (s.Abar.col(k).sum() == 0) s.Abar(std::uniform_int_distribution<int>(0, L - 1)(gen), k) = 1;
  }
  s.Cbar.resize(L);
  for (int l = 0; l < L; ++l) s.Cbar[l] = cap(gen);
  return s;
}

// Feasible route vector sampled by rejection from the box [0, max Cbar]^K.
Vec SampleRoutes(const MultipathSpec& s, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, s.Cbar.maxCoeff());
  while (true) {
    Vec y(s.H.cols());
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = u(gen);
    if (((s.Abar * y - s.Cbar).array() <= 0.0).all()) return y;
    y *= 0.5;
    if (((s.Abar * y - s.Cbar).array() <= 0.0).all()) return y;
  }
}

}  // namespace

TEST_CASE("parallel links pool their capacity") {
  const ReducedRepresentation r = Project(ParallelLinks());
  REQUIRE(r.A.rows() == 1);
  CHECK(r.A(0, 0) == 1.0);
  CHECK(r.C[0] == 5.0);
  CHECK(r.C_exact[0] == "5");
  CHECK(r.certificate[0][0] == doctest::Approx(5.0));
  CHECK(PolytopesEqual(r.A, r.C, M({{1}}), V({5})));
}

TEST_CASE("identity routing reproduces the network") {
  MultipathSpec s;
  s.H = Mat::Identity(3, 3);
  s.Abar = M({{1, 0, 1}, {0, 1, 1}});
  s.Cbar = V({1, 2});
  const ReducedRepresentation r = Project(s);
  CHECK(r.A == s.Abar);
  CHECK(r.C == s.Cbar);

  // A duplicated looser resource is redundant and disappears.
  s.Abar = M({{1, 0, 1}, {0, 1, 1}, {1, 0, 1}});
  s.Cbar = V({1, 2, 4});
  const ReducedRepresentation d = Project(s);
  CHECK(d.A == M({{1, 0, 1}, {0, 1, 1}}));
  CHECK(d.C == V({1, 2}));
}

TEST_CASE("generalized cut constraints") {
  const MultipathSpec s = GeneralizedCut(3, 4, 1);
  const ReducedRepresentation r = Project(s);
  const Mat target = M({{1, 1, 0}, {0.5, 0, 1}});
  CHECK(PolytopesEqual(r.A, r.C, target, V({7, 1})));
  bool half_found = false;
  for (const auto& row : r.A_exact) {
    if (row[0] == "1/2") half_found = true;
  }
  CHECK(half_found);
  const LocalTrafficReport lt = LocalTrafficCheck(r.A);
  CHECK(lt.holds);
  CHECK(LocalTrafficCheck(target).witness == std::vector<std::optional<std::size_t>>{1, 2});
}

TEST_CASE("local traffic condition") {
  const LocalTrafficReport linear = LocalTrafficCheck(M({{1, 0, 1}, {0, 1, 1}}));
  CHECK(linear.holds);
  CHECK(linear.witness == std::vector<std::optional<std::size_t>>{0, 1});
  const LocalTrafficReport shared = LocalTrafficCheck(M({{1, 1}, {1, 1}}));
  CHECK_FALSE(shared.holds);
  CHECK_FALSE(shared.witness[0].has_value());
  CHECK_FALSE(shared.witness[1].has_value());
}

TEST_CASE("polytope comparison") {
  const Mat a = M({{1, 0, 1}, {0, 1, 1}});
  CHECK(PolytopesEqual(a, V({1, 1}), a, V({1, 1})));
  CHECK_FALSE(PolytopesEqual(M({{1}}), V({1}), M({{1}}), V({2})));
  CHECK(PolytopesEqual(M({{2}}), V({2}), M({{1}}), V({1})));
  CHECK_THROWS_AS(PolytopesEqual(M({{1, 0}}), V({1}), M({{1, 1}}), V({1})), Error);
  CHECK_THROWS_AS(PolytopeVertices(M({{1, -1}}), V({1})), Error);
  CHECK(PolytopeVertices(M({{1, 1}}), V({1})).size() == 3);
}

TEST_CASE("random instances: structure, equality and minimality") {
  std::mt19937_64 gen(5150);
  for (int trial = 0; trial < 60; ++trial) {
    const MultipathSpec s = RandomMultipath(gen);
    const ReducedRepresentation r = Project(s);
    const Eigen::Index I = s.H.rows();
    REQUIRE(r.A.cols() == I);
    REQUIRE(r.A.rows() >= 1);
    CHECK((r.C.array() > 0.0).all());
    CHECK((r.A.array() >= 0.0).all());
    for (Eigen::Index i = 0; i < I; ++i) CHECK(r.A.col(i).maxCoeff() > 0.0);
    for (Eigen::Index j = 0; j < r.A.rows(); ++j) CHECK(r.A.row(j).maxCoeff() == 1.0);

    // Bounded, and every vertex is attainable by some routing.
    const auto vertices = PolytopeVertices(r.A, r.C);
    for (const auto& v : vertices) CHECK(InRegion(s, v));

    // Every routing satisfies the reduced constraints, and so do its
    // componentwise shrinkings.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 30; ++k) {
      const Vec lambda = s.H * SampleRoutes(s, gen);
      CHECK(((r.A * lambda - r.C).array() <= 1e-9).all());
      Vec shrunk = lambda;
      for (Eigen::Index i = 0; i < I; ++i) shrunk[i] *= u(gen);
      CHECK(InRegion(s, shrunk));
      CHECK(((r.A * shrunk - r.C).array() <= 1e-9).all());
    }

    // Certificates sit on their own facet, strictly inside the others, and
    // stepping past them along the facet normal leaves the region, so no
    // inequality can be dropped.
    for (Eigen::Index j = 0; j < r.A.rows(); ++j) {
      const Vec& c = r.certificate[static_cast<std::size_t>(j)];
      CHECK(r.A.row(j).dot(c) == doctest::Approx(r.C[j]));
      CHECK(InRegion(s, c, 1e-7));
      for (Eigen::Index t = 0; t < r.A.rows(); ++t) {
        if (t != j) CHECK(r.A.row(t).dot(c) < r.C[t] - 1e-9);
      }
      const Vec outside = c + 1e-4 * r.A.row(j).transpose();
      CHECK_FALSE(InRegion(s, outside, 0.0));
    }
  }
}

TEST_CASE("allocation on the reduced network matches direct routing") {
  // Pair 0 splits over resources 0 and 1, pair 1 uses resource 1 only.
  MultipathSpec s;
  s.H = M({{1, 1, 0}, {0, 0, 1}});
  s.Abar = M({{1, 0, 0}, {0, 1, 1}});
  s.Cbar = V({1, 2});
  s.nu = V({1, 1});
  s.mu = V({1, 1});
  s.kappa = V({1, 2});
  for (double alpha : {1.0, 2.0}) {
    s.alpha = alpha;
    const NetworkSpec net = ReducedNetwork(s, Project(s));
    const Vec n = V({3, 1});
    const AllocationResult a = Allocate(net, n);

    // Grid over the split of pair 0 and the route of pair 1.
    const double h = 1e-3;
    double best = -std::numeric_limits<double>::infinity();
    Vec best_lambda;
    for (double y0 = 0; y0 <= 1.0 + 1e-12; y0 += h) {
      for (double y2 = h; y2 <= 2.0 + 1e-12; y2 += h) {
        const double y1 = 2.0 - y2;  // pair 0 takes what is left of resource 1
        const Vec lambda = V({y0 + y1, y2});
        if (lambda[0] <= 0) continue;
        const double u = Utility(net, n, lambda);
        if (u > best) {
          best = u;
          best_lambda = lambda;
        }
      }
    }
    CHECK(InRegion(s, a.lambda, 1e-8));
    CHECK(Utility(net, n, a.lambda) >= best - 1e-9);
    CHECK((a.lambda - best_lambda).cwiseAbs().maxCoeff() < 1e-2);
  }
}

TEST_CASE("validation errors") {
  MultipathSpec s = ParallelLinks();
  s.H = M({{1, 0}});
  CHECK_THROWS_AS(Project(s), Error);
  s = ParallelLinks();
  s.Abar = M({{1, 0}, {0, 0}});
  CHECK_THROWS_AS(Project(s), Error);
  s = ParallelLinks();
  s.Cbar = V({2, 0});
  CHECK_THROWS_AS(Project(s), Error);
  s = ParallelLinks();
  s.Cbar = V({2});
  try {
    Project(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  s = ParallelLinks();
  s.H = M({{1, 1}, {0, 0}});
  CHECK_THROWS_AS(Project(s), Error);
  CHECK_THROWS_AS(ReducedNetwork(ParallelLinks(), Project(ParallelLinks())), Error);
}

TEST_CASE("elimination cap") {
  // Many routes per pair over a shared mesh; a tiny cap must trip.
  MultipathSpec s;
  const int K = 8;
  s.H = Mat::Zero(2, K);
  for (int k = 0; k < K; ++k) s.H(k % 2, k) = 1;
  s.Abar = Mat::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    s.Abar(k, k) = 1;
    s.Abar((k + 1) % K, k) = 1;
  }
  s.Cbar = Vec::Constant(K, 1.0);
  ProjectOptions tiny;
  tiny.max_inequalities = 5;
  try {
    Project(s, tiny);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEliminationBlowup);
  }
  const ReducedRepresentation r = Project(s);
  CHECK(r.warnings.empty());
  CHECK(r.A.rows() >= 1);
}
