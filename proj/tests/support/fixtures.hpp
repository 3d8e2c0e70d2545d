#ifndef BWSHARE_TESTS_FIXTURES_HPP
#define BWSHARE_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/types.hpp"

namespace bwshare::testing {

inline Vec V(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Mat M(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Mat m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

// A = [[1,0,1],[0,1,1]], unit rates and weights, C = (1,1).
inline NetworkSpec UnitLinear(double alpha = 1.0) {
  return LinearNetwork(2, Vec::Ones(3), Vec::Ones(3), Vec::Ones(3), alpha,
                       Vec::Ones(2));
}

// Same topology, nu = (.5,.5,.5): A rho = C exactly.
inline NetworkSpec CriticalLinear(double alpha = 1.0) {
  return LinearNetwork(2, Vec::Constant(3, 0.5), Vec::Ones(3), Vec::Ones(3),
                       alpha, Vec::Ones(2));
}

// Random network with full row rank and no empty route. Each route uses a
// random nonempty subset of resources; the first J routes are local so rank
// is guaranteed.
inline NetworkSpec RandomNetwork(std::mt19937_64& gen, int J, int extra_routes,
                                 double alpha, bool unit_kappa = true) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::bernoulli_distribution coin(0.5);
  const int I = J + extra_routes;
  NetworkSpec spec;
  spec.A = Mat::Zero(J, I);
  for (int j = 0; j < J; ++j) spec.A(j, j) = 1.0;
  for (int i = J; i < I; ++i) {
    bool any = false;
    for (int j = 0; j < J; ++j) {
      if (coin(gen)) {
        spec.A(j, i) = 1.0;
        any = true;
      }
    }
    if (!any) spec.A(static_cast<int>(gen() % static_cast<unsigned>(J)), i) = 1.0;
  }
  spec.C.resize(J);
  for (int j = 0; j < J; ++j) spec.C[j] = u(gen);
  spec.nu.resize(I);
  spec.mu.resize(I);
  spec.kappa.resize(I);
  for (int i = 0; i < I; ++i) {
    spec.nu[i] = u(gen);
    spec.mu[i] = u(gen);
    spec.kappa[i] = unit_kappa ? 1.0 : u(gen);
  }
  spec.alpha = alpha;
  ValidateNetwork(spec);
  return spec;
}

// Brute-force optimum of the alpha-fair objective over a grid of the feasible
// region {lambda >= 0 : A lambda <= C}. Independent of the dual solver: the
// first I-1 supported coordinates run over a grid of the given resolution and
// the last one takes its largest feasible value (the objective is increasing
// in every coordinate), and the utility is evaluated directly.
inline double GridSearchBestUtility(
    const NetworkSpec& spec, const Vec& n, double resolution,
    const std::function<double(const Vec&)>& utility) {
  const auto I = spec.A.cols();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < I; ++i) {
    if (n[i] > 0.0) support.push_back(i);
  }
  double best = -std::numeric_limits<double>::infinity();
  if (support.empty()) return best;
  Vec lam = Vec::Zero(I);
  auto upper = [&](Eigen::Index i) {
    double ub = std::numeric_limits<double>::infinity();
    const Vec used = spec.A * lam;
    for (Eigen::Index j = 0; j < spec.A.rows(); ++j) {
      if (spec.A(j, i) > 0.0) {
        ub = std::min(ub, (spec.C[j] - used[j] + spec.A(j, i) * lam[i]) / spec.A(j, i));
      }
    }
    return ub;
  };
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    const Eigen::Index i = support[k];
    lam[i] = 0.0;
    const double ub = upper(i);
    if (ub < 0.0) return;
    if (k + 1 == support.size()) {
      lam[i] = ub;
      best = std::max(best, utility(lam));
      lam[i] = 0.0;
      return;
    }
    const int steps = static_cast<int>(std::floor(ub / resolution));
    for (int s = 1; s <= steps; ++s) {
      lam[i] = s * resolution;
      rec(k + 1);
    }
    lam[i] = 0.0;
  };
  rec(0);
  return best;
}

}  // namespace bwshare::testing

#endif  // BWSHARE_TESTS_FIXTURES_HPP
