#include "bwshare/detail/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bwshare::detail {

std::optional<Vec> FindNonnegativeSolution(const Mat& A, const Vec& b) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (m == 0) return Vec::Zero(n);

  // Columns: x (n), surplus (m), artificial (m), rhs.
  const Eigen::Index cols = n + 2 * m + 1;
  const Eigen::Index rhs = cols - 1;
  Mat T = Mat::Zero(m + 1, cols);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    T.row(i).head(n) = sign * A.row(i);
    T(i, n + i) = -sign;
    T(i, n + m + i) = 1.0;
    T(i, rhs) = sign * b[i];
  }
  // Objective row holds reduced costs of minimizing the artificial sum.
  for (Eigen::Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
  for (Eigen::Index i = 0; i < m; ++i) T(m, n + m + i) = 0.0;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + m + i;

  const double scale = std::max(1.0, std::max(A.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  const double tol = 1e-12 * scale;
  const int max_pivots = 50 * static_cast<int>(cols);
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    Eigen::Index enter = -1;
    for (Eigen::Index c = 0; c < rhs; ++c) {
      if (T(m, c) < -tol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) <= tol) continue;
      const double ratio = T(i, rhs) / T(i, enter);
      if (leave < 0 || ratio < best - tol ||
          (std::abs(ratio - best) <= tol &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) break;  // unbounded direction; cannot happen in phase one
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  if (-T(m, rhs) > 1e-9 * scale) return std::nullopt;

  Vec x = Vec::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index c = basis[static_cast<std::size_t>(i)];
    if (c < n) x[c] = std::max(0.0, T(i, rhs));
  }
  if (((A * x - b).array() < -1e-9 * scale).any()) return std::nullopt;
  return x;
}

}  // namespace bwshare::detail
