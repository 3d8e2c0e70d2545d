#include "bwshare/srbm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "bwshare/error.hpp"
#include "bwshare/rng.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "srbm";

// In-place projected Gauss-Seidel; y enters as q and leaves as q + M du.
void ProjectedGaussSeidel(const Mat& M, Vec& y, Vec& du, double tolerance,
                          int max_sweeps) {
  const Eigen::Index J = y.size();
  du.setZero();
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      const double next = std::max(0.0, du[j] - y[j] / M(j, j));
      const double d = next - du[j];
      if (d != 0.0) {
        y.noalias() += d * M.col(j);
        du[j] = next;
        change = std::max(change, std::abs(d));
      }
    }
    if (change <= tolerance * scale && y.minCoeff() >= -tolerance * scale) return;
  }
  std::ostringstream os;
  os << "projected Gauss-Seidel did not converge in " << max_sweeps << " sweeps";
  throw Error(kModule, ErrorCode::kLcpNotConverged, os.str());
}

double TQuantile975(int dof) {
  return boost::math::quantile(boost::math::students_t(static_cast<double>(dof)), 0.975);
}

}  // namespace

Vec SolveOrthantLcp(const Mat& M, const Vec& q, double tolerance, int max_sweeps) {
  if (M.rows() != M.cols() || M.rows() != q.size()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "LCP dimensions disagree");
  }
  if (!(M.diagonal().array() > 0.0).all()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "LCP matrix needs a positive diagonal");
  }
  Vec y = q;
  Vec du(q.size());
  ProjectedGaussSeidel(M, y, du, tolerance, max_sweeps);
  return du;
}

SrbmPath SimulateSrbm(const ConeGeometry& geom, const Vec& w0, double horizon,
                      double h, std::uint64_t seed, const SrbmOptions& options,
                      const SrbmObserver& observer) {
  const Eigen::Index J = geom.G.rows();
  if (w0.size() != J) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "w0 must have J entries");
  }
  if (!(h > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "need h > 0 and a positive horizon");
  }
  if (!InCone(geom, w0)) {
    throw Error(kModule, ErrorCode::kNotInCone, "w0 lies outside the workload cone");
  }
  if (options.record_every == 0) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "record_every must be positive");
  }

  const Mat& M = geom.G_inv;
  const Eigen::LLT<Mat> chol(geom.Gamma);
  if (chol.info() != Eigen::Success) {
    throw Error(kModule, ErrorCode::kSingularG, "covariance matrix is not positive definite");
  }
  const double sqrt_h = std::sqrt(h);
  const Mat noise = sqrt_h * (M * chol.matrixL().toDenseMatrix());
  const Vec drift = h * (M * geom.theta);
  // Per-coordinate variance of the free increment over one step.
  const Vec step_var = (noise * noise.transpose()).diagonal();
  const double away = options.push_threshold * sqrt_h;
  const auto steps = static_cast<std::uint64_t>(std::max(1.0, std::round(horizon / h)));

  SrbmPath path;
  path.h = h;
  path.seed = seed;
  path.steps = steps;
  path.push_total = Vec::Zero(J);
  path.push_away = Vec::Zero(J);

  Rng rng = Rng(seed).Substream(kSrbmNoiseStream);
  Vec q = (M * w0).cwiseMax(0.0);
  Vec u = Vec::Zero(J);
  Vec z(J), y(J), du(J), m(J);

  std::vector<double> q_buf, u_buf;
  auto record = [&](double t) {
    path.times.push_back(t);
    q_buf.insert(q_buf.end(), q.data(), q.data() + J);
    u_buf.insert(u_buf.end(), u.data(), u.data() + J);
  };
  if (options.record) {
    const std::size_t expected = static_cast<std::size_t>(steps / options.record_every) + 2;
    path.times.reserve(expected);
    q_buf.reserve(expected * static_cast<std::size_t>(J));
    u_buf.reserve(expected * static_cast<std::size_t>(J));
    record(0.0);
  }

  for (std::uint64_t k = 1; k <= steps; ++k) {
    for (Eigen::Index j = 0; j < J; ++j) z[j] = rng.StandardNormal();
    y = q + drift;
    y.noalias() += noise * z;
    if (options.bridge_correction) {
      // Minimum of a Brownian bridge from q_j to y_j with variance step_var_j.
      for (Eigen::Index j = 0; j < J; ++j) {
        const double lo = std::min(q[j], y[j]);
        const double gap = y[j] - q[j];
        const double e = rng.Exponential(1.0);
        m[j] = lo + 0.5 * (std::abs(gap) - std::sqrt(gap * gap + 2.0 * step_var[j] * e));
        m[j] = std::min(m[j], lo);
      }
    } else {
      m = y;
    }
    if (m.minCoeff() < 0.0) {
      ProjectedGaussSeidel(M, m, du, options.lcp_tolerance, options.lcp_max_sweeps);
      for (Eigen::Index j = 0; j < J; ++j) {
        if (du[j] <= 0.0) continue;
        path.push_total[j] += du[j];
        if (q[j] > away) path.push_away[j] += du[j];
      }
      y.noalias() += M * du;
      u += du;
      q = y.cwiseMax(0.0);
    } else {
      q = y;
    }
    const double t = static_cast<double>(k) * h;
    if (observer) observer(t, q);
    if (options.record && (k % options.record_every == 0 || k == steps)) record(t);
  }

  const auto n = static_cast<Eigen::Index>(path.times.size());
  path.Q = Eigen::Map<const Mat>(q_buf.data(), J, n);
  path.U = Eigen::Map<const Mat>(u_buf.data(), J, n);
  path.W = geom.G * path.Q;
  path.final_Q = q;
  return path;
}

ProductFormReport ValidateProductForm(const ConeGeometry& geom,
                                      const std::vector<SrbmPath>& paths,
                                      const ProductFormOptions& options) {
  const Eigen::Index J = geom.G.rows();
  if (!geom.unit_weights) {
    throw Error(kModule, ErrorCode::kNotApplicable,
                "product-form validation needs kappa = 1 on every route");
  }
  if (!(geom.theta.array() < 0.0).all()) {
    throw Error(kModule, ErrorCode::kNotApplicable,
                "product-form validation needs theta < 0 componentwise");
  }
  if (paths.empty()) {
    throw Error(kModule, ErrorCode::kTooFewBatches, "no paths supplied");
  }
  const auto P = static_cast<int>(paths.size());
  const int per_path = std::max(1, (options.batches + P - 1) / P);
  const int B = per_path * P;
  if (B < 20) {
    throw Error(kModule, ErrorCode::kTooFewBatches, "at least 20 batches are required");
  }

  // Collect post-burn-in columns batch by batch.
  std::vector<std::vector<Eigen::Index>> batch_cols;
  std::vector<const SrbmPath*> batch_path;
  std::size_t total = 0;
  for (const SrbmPath& p : paths) {
    if (p.Q.rows() != J || p.times.empty()) {
      throw Error(kModule, ErrorCode::kDimensionMismatch, "path does not match the geometry");
    }
    const double start = options.burn_in * p.times.back();
    const auto first = static_cast<Eigen::Index>(
        std::lower_bound(p.times.begin(), p.times.end(), start) - p.times.begin());
    const Eigen::Index count = p.Q.cols() - first;
    if (count < per_path) {
      throw Error(kModule, ErrorCode::kTooFewBatches, "path has too few recorded samples");
    }
    for (int b = 0; b < per_path; ++b) {
      std::vector<Eigen::Index> cols;
      const Eigen::Index lo = first + count * b / per_path;
      const Eigen::Index hi = first + count * (b + 1) / per_path;
      for (Eigen::Index c = lo; c < hi; ++c) cols.push_back(c);
      total += cols.size();
      batch_cols.push_back(std::move(cols));
      batch_path.push_back(&p);
    }
  }

  ProductFormReport r;
  r.samples = total;
  r.expected_mean = geom.theta.cwiseInverse().cwiseAbs();
  Vec sum = Vec::Zero(J);
  Mat cross = Mat::Zero(J, J);
  std::vector<Vec> batch_mean;
  std::vector<Mat> batch_corr;
  for (std::size_t b = 0; b < batch_cols.size(); ++b) {
    const Mat& Q = batch_path[b]->Q;
    Vec s = Vec::Zero(J);
    Mat c = Mat::Zero(J, J);
    for (Eigen::Index col : batch_cols[b]) {
      s += Q.col(col);
      c.noalias() += Q.col(col) * Q.col(col).transpose();
    }
    sum += s;
    cross += c;
    const double n = static_cast<double>(batch_cols[b].size());
    const Vec m = s / n;
    const Mat cov = c / n - m * m.transpose();
    Mat corr = Mat::Identity(J, J);
    for (Eigen::Index a = 0; a < J; ++a) {
      for (Eigen::Index k = 0; k < J; ++k) {
        if (a != k) corr(a, k) = cov(a, k) / std::sqrt(cov(a, a) * cov(k, k));
      }
    }
    batch_mean.push_back(m);
    batch_corr.push_back(corr);
  }
  const double N = static_cast<double>(total);
  r.mean = sum / N;
  const Mat cov = cross / N - r.mean * r.mean.transpose();
  r.correlation = Mat::Identity(J, J);
  for (Eigen::Index a = 0; a < J; ++a) {
    for (Eigen::Index k = 0; k < J; ++k) {
      if (a != k) r.correlation(a, k) = cov(a, k) / std::sqrt(cov(a, a) * cov(k, k));
    }
  }
  const double t = TQuantile975(B - 1);
  r.half_width = Vec::Zero(J);
  r.correlation_half_width = Mat::Zero(J, J);
  Vec mean_of_means = Vec::Zero(J);
  Mat mean_of_corr = Mat::Zero(J, J);
  for (int b = 0; b < B; ++b) {
    mean_of_means += batch_mean[static_cast<std::size_t>(b)] / B;
    mean_of_corr += batch_corr[static_cast<std::size_t>(b)] / B;
  }
  for (int b = 0; b < B; ++b) {
    const Vec dm = batch_mean[static_cast<std::size_t>(b)] - mean_of_means;
    const Mat dc = batch_corr[static_cast<std::size_t>(b)] - mean_of_corr;
    r.half_width += dm.cwiseProduct(dm) / (B - 1);
    r.correlation_half_width += dc.cwiseProduct(dc) / (B - 1);
  }
  r.half_width = t * (r.half_width / B).cwiseSqrt();
  r.correlation_half_width = t * (r.correlation_half_width / B).cwiseSqrt();

  // Kolmogorov-Smirnov distance of each marginal.
  r.ks = Vec::Zero(J);
  std::vector<double> xs;
  xs.reserve(total);
  for (Eigen::Index j = 0; j < J; ++j) {
    xs.clear();
    for (std::size_t b = 0; b < batch_cols.size(); ++b) {
      for (Eigen::Index col : batch_cols[b]) xs.push_back(batch_path[b]->Q(j, col));
    }
    std::sort(xs.begin(), xs.end());
    const double rate = -geom.theta[j];
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double F = 1.0 - std::exp(-rate * xs[i]);
      d = std::max(d, std::max(std::abs(static_cast<double>(i + 1) / N - F),
                               std::abs(static_cast<double>(i) / N - F)));
    }
    r.ks[j] = d;
  }

  // Log-linear fit on a product grid in Q: the density there is proportional
  // to exp((G v) . q), so the fitted slope b gives v = G^-1 b.
  r.v_estimate = Vec::Constant(J, std::numeric_limits<double>::quiet_NaN());
  r.v_relative_error = std::numeric_limits<double>::quiet_NaN();
  if (J <= 3 && options.bins > 1) {
    const int nb = options.bins;
    const Vec width = 3.0 * r.expected_mean / nb;
    std::size_t cells = 1;
    for (Eigen::Index j = 0; j < J; ++j) cells *= static_cast<std::size_t>(nb);
    std::vector<double> counts(cells, 0.0);
    for (std::size_t b = 0; b < batch_cols.size(); ++b) {
      for (Eigen::Index col : batch_cols[b]) {
        std::size_t idx = 0, stride = 1;
        bool inside = true;
        for (Eigen::Index j = 0; j < J; ++j) {
          const int k = static_cast<int>(batch_path[b]->Q(j, col) / width[j]);
          if (k >= nb) {
            inside = false;
            break;
          }
          idx += static_cast<std::size_t>(k) * stride;
          stride *= static_cast<std::size_t>(nb);
        }
        if (inside) counts[idx] += 1.0;
      }
    }
    Mat XtX = Mat::Zero(J + 1, J + 1);
    Vec Xty = Vec::Zero(J + 1);
    for (std::size_t idx = 0; idx < cells; ++idx) {
      if (counts[idx] < 10.0) continue;
      Vec x(J + 1);
      x[0] = 1.0;
      std::size_t rest = idx;
      for (Eigen::Index j = 0; j < J; ++j) {
        x[j + 1] = (static_cast<double>(rest % static_cast<std::size_t>(nb)) + 0.5) * width[j];
        rest /= static_cast<std::size_t>(nb);
      }
      const double w = counts[idx];
      XtX.noalias() += w * x * x.transpose();
      Xty += w * std::log(counts[idx]) * x;
    }
    const Vec beta = XtX.ldlt().solve(Xty);
    if (beta.allFinite()) {
      r.v_estimate = geom.G_inv * beta.tail(J);
      r.v_relative_error = (r.v_estimate - geom.v).norm() / geom.v.norm();
    }
  }
  return r;
}

}  // namespace bwshare
