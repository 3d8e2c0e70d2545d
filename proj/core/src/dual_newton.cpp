#include "bwshare/detail/dual_newton.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace bwshare::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Evaluation {
  double value = kInf;
  Vec gradient;
  Vec d2;  // per-term curvature
};

class Problem {
 public:
  Problem(const Mat& A, const Vec& c, const TermFn& h) : A_(A), c_(c), h_(h) {}

  double Value(const Vec& y) const {
    const Vec s = A_.transpose() * y;
    double f = c_.dot(y);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double v = h_(i, s[i]).value;
      if (!std::isfinite(v)) return kInf;
      f += v;
    }
    return f;
  }

  Evaluation Evaluate(const Vec& y) const {
    Evaluation e;
    const Vec s = A_.transpose() * y;
    Vec d1(s.size());
    e.d2.resize(s.size());
    double f = c_.dot(y);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const Term t = h_(i, s[i]);
      f += t.value;
      d1[i] = t.d1;
      e.d2[i] = t.d2;
    }
    e.value = std::isfinite(f) ? f : kInf;
    e.gradient = c_ + A_ * d1;
    return e;
  }

  // Derivative of f along coordinate j when y_j is replaced by t.
  double CoordinateDerivative(const Vec& s, Eigen::Index j, double y_j,
                              double t) const {
    double g = c_[j];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double a = A_(j, i);
      if (a == 0.0) continue;
      g += a * h_(i, s[i] + a * (t - y_j)).d1;
    }
    return g;
  }

  const Mat& A() const { return A_; }

 private:
  const Mat& A_;
  const Vec& c_;
  const TermFn& h_;
};

// One sweep of exact coordinate minimization; returns false if some
// coordinate derivative could not be bracketed.
bool CoordinateSweep(const Problem& problem, Vec& y) {
  const Mat& A = problem.A();
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const Vec s = A.transpose() * y;
    const double y_j = y[j];
    auto deriv = [&](double t) { return problem.CoordinateDerivative(s, j, y_j, t); };
    const double g0 = deriv(0.0);
    // Stay inside the domain: moving down to 0 may leave it.
    if (std::isfinite(g0) && g0 >= 0.0) {
      y[j] = 0.0;
      continue;
    }
    double lo = std::isfinite(g0) ? 0.0 : y_j;
    if (!std::isfinite(g0)) {
      // Shrink toward zero while the derivative stays finite and negative.
      double t = y_j;
      for (int k = 0; k < 200; ++k) {
        const double next = 0.5 * t;
        const double g = deriv(next);
        if (!std::isfinite(g) || g > 0.0) break;
        t = next;
      }
      lo = t;
    }
    double hi = std::max(2.0 * y_j, lo + 1.0);
    int guard = 0;
    while (deriv(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 2000) return false;
    }
    for (int k = 0; k < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++k) {
      const double mid = 0.5 * (lo + hi);
      const double g = deriv(mid);
      if (!std::isfinite(g) || g > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    y[j] = 0.5 * (lo + hi);
  }
  return true;
}

}  // namespace

double ProjectedGradientResidual(const Vec& y, const Vec& g) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double term = y[j] > 0.0 ? std::abs(g[j]) : std::max(0.0, -g[j]);
    r = std::max(r, term);
  }
  return r;
}

DualNewtonResult MinimizeSeparableDual(const Mat& A, const Vec& c,
                                       const TermFn& h, Vec y0,
                                       const DualNewtonOptions& options) {
  const Problem problem(A, c, h);
  const Eigen::Index J = A.rows();
  DualNewtonResult result;
  Vec y = y0.cwiseMax(0.0);
  Evaluation e = problem.Evaluate(y);

  constexpr double kArmijo = 1e-4;
  int stalls = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const double residual = ProjectedGradientResidual(y, e.gradient);
    if (residual <= options.tolerance) {
      result.converged = true;
      break;
    }

    // epsilon-active set: coordinates at (or numerically near) the bound
    // whose gradient pushes them further down.
    double eps = 0.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      eps = std::max(eps, std::abs(y[j] - std::max(0.0, y[j] - e.gradient[j])));
    }
    eps = std::min(eps, 1e-3);
    std::vector<Eigen::Index> free_set;
    std::vector<bool> active(static_cast<std::size_t>(J), false);
    for (Eigen::Index j = 0; j < J; ++j) {
      if (y[j] <= eps && e.gradient[j] > 0.0) {
        active[static_cast<std::size_t>(j)] = true;
      } else {
        free_set.push_back(j);
      }
    }

    const Mat H = A * e.d2.asDiagonal() * A.transpose();
    Vec direction = Vec::Zero(J);
    for (Eigen::Index j = 0; j < J; ++j) {
      if (active[static_cast<std::size_t>(j)]) {
        direction[j] = -e.gradient[j] / std::max(H(j, j), 1e-300);
      }
    }
    if (!free_set.empty()) {
      const auto F = static_cast<Eigen::Index>(free_set.size());
      Mat HF(F, F);
      Vec gF(F);
      double max_diag = 0.0;
      for (Eigen::Index a = 0; a < F; ++a) {
        gF[a] = e.gradient[free_set[a]];
        for (Eigen::Index b = 0; b < F; ++b) HF(a, b) = H(free_set[a], free_set[b]);
        max_diag = std::max(max_diag, HF(a, a));
      }
      double damping = 1e-14 * std::max(max_diag, 1e-300);
      Vec dF;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Eigen::LDLT<Mat> ldlt(HF + damping * Mat::Identity(F, F));
        dF = ldlt.solve(-gF);
        if (ldlt.info() == Eigen::Success && dF.allFinite() &&
            ldlt.isPositive() && gF.dot(dF) < 0.0) {
          break;
        }
        damping *= 100.0;
        dF.resize(0);
      }
      if (dF.size() == 0) {
        // Fall back to a diagonally scaled gradient step.
        dF.resize(F);
        for (Eigen::Index a = 0; a < F; ++a) dF[a] = -gF[a] / std::max(HF(a, a), 1e-300);
      }
      for (Eigen::Index a = 0; a < F; ++a) direction[free_set[a]] = dF[a];
    }

    // Near the optimum f is flat to rounding; there the step is judged by
    // the projected-gradient residual instead.
    const double f_noise = 64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(e.value));
    bool accepted = false;
    double beta = 1.0;
    for (int ls = 0; ls < 80; ++ls, beta *= 0.5) {
      const Vec trial = (y + beta * direction).cwiseMax(0.0);
      const double f_trial = problem.Value(trial);
      if (!std::isfinite(f_trial)) continue;
      double predicted = 0.0;
      for (Eigen::Index j = 0; j < J; ++j) {
        predicted += e.gradient[j] * (y[j] - trial[j]);
      }
      const bool armijo = e.value - f_trial >= kArmijo * predicted &&
                          f_trial < e.value;
      bool flat_progress = false;
      if (!armijo && std::abs(e.value - f_trial) <= f_noise) {
        Evaluation t = problem.Evaluate(trial);
        if (ProjectedGradientResidual(trial, t.gradient) < 0.5 * residual) {
          y = trial;
          e = std::move(t);
          flat_progress = true;
        }
      }
      if (flat_progress) {
        accepted = true;
        break;
      }
      if (armijo) {
        y = trial;
        e = problem.Evaluate(y);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Newton stalled (flat objective at rounding level or a kink); use
      // coordinate minimization to make progress.
      if (++stalls > 50 || !CoordinateSweep(problem, y)) break;
      e = problem.Evaluate(y);
    }
  }
  result.y = y;
  result.gradient = e.gradient;
  result.residual = ProjectedGradientResidual(y, e.gradient);
  result.converged = result.residual <= options.tolerance;
  return result;
}

}  // namespace bwshare::detail
