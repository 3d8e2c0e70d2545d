#include "bwshare/cone.hpp"

#include <cmath>
#include <sstream>

#include "bwshare/detail/simplex.hpp"
#include "bwshare/error.hpp"
#include "bwshare/fluid.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "cone";
constexpr std::size_t kMaxCompletelySDimension = 12;

void RequireInCone(const ConeGeometry& geom, const Vec& w) {
  if (w.size() != geom.G.rows()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "w has the wrong length");
  }
  if (!InCone(geom, w)) {
    throw Error(kModule, ErrorCode::kNotInCone, "w lies outside the workload cone");
  }
}

}  // namespace

ConeGeometry BuildGeometry(const NetworkSpec& spec, const Vec& theta) {
  ValidateNetwork(spec);
  if (spec.alpha != 1.0) {
    throw Error(kModule, ErrorCode::kNotApplicable,
                "cone geometry is defined for alpha = 1 only");
  }
  const Eigen::Index J = spec.A.rows();
  if (theta.size() != J) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "theta must have J entries");
  }
  ConeGeometry g;
  g.A = spec.A;
  g.B = spec.nu.cwiseQuotient(spec.mu.cwiseProduct(spec.mu).cwiseProduct(spec.kappa));
  g.G = WorkloadGram(spec);
  g.G = 0.5 * (g.G + g.G.transpose());
  Eigen::LLT<Mat> llt(g.G);
  const Eigen::SelfAdjointEigenSolver<Mat> eig(g.G);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (llt.info() != Eigen::Success || !(lo > 1e-13 * hi)) {
    std::ostringstream os;
    os << "ABA' is numerically singular (eigenvalues " << lo << " .. " << hi << ")";
    throw Error(kModule, ErrorCode::kSingularG, os.str());
  }
  g.G_inv = llt.solve(Mat::Identity(J, J));
  g.G_inv = 0.5 * (g.G_inv + g.G_inv.transpose());
  g.normals = g.G_inv;
  const Vec m_inv = spec.mu.cwiseInverse();
  g.Gamma = 2.0 * spec.A * m_inv.cwiseProduct(spec.nu).cwiseProduct(m_inv).asDiagonal() *
            spec.A.transpose();
  g.theta = theta;
  g.v = 2.0 * g.Gamma.ldlt().solve(theta);
  g.unit_weights = (spec.kappa.array() == 1.0).all();
  return g;
}

bool InCone(const ConeGeometry& geom, const Vec& w, double tol) {
  if (w.size() != geom.G.rows()) return false;
  const Vec d = geom.normals * w;
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    if (d[j] < -tol * geom.normals.row(j).norm() * std::max(1.0, w.norm())) return false;
  }
  return true;
}

double FaceDistance(const ConeGeometry& geom, const Vec& w, std::size_t j) {
  RequireInCone(geom, w);
  const auto row = static_cast<Eigen::Index>(j);
  if (row >= geom.normals.rows()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "face index out of range");
  }
  return std::max(0.0, geom.normals.row(row).dot(w) / geom.normals.row(row).norm());
}

CompletelySResult CompletelySCheck(const Mat& M) {
  if (M.rows() != M.cols()) {
    throw Error(kModule, ErrorCode::kDimensionMismatch, "matrix must be square");
  }
  const auto n = static_cast<std::size_t>(M.rows());
  if (n > kMaxCompletelySDimension) {
    throw Error(kModule, ErrorCode::kDimensionTooLarge,
                "completely-S check enumerates principal submatrices; dimension must be <= 12");
  }
  CompletelySResult out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) idx.push_back(k);
    }
    const auto s = static_cast<Eigen::Index>(idx.size());
    Mat D(s, s);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = 0; b < s; ++b) {
        D(a, b) = M(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
      }
    }
    // D x > 0 for some x >= 0 iff D x >= 1 is feasible (scale x).
    if (!detail::FindNonnegativeSolution(D, Vec::Ones(s))) {
      out.holds = false;
      out.witness = idx;
      return out;
    }
  }
  return out;
}

SkewSymmetryReport SkewSymmetry(const ConeGeometry& geom) {
  const Eigen::Index J = geom.Gamma.rows();
  const Eigen::SelfAdjointEigenSolver<Mat> eig(geom.Gamma);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error(kModule, ErrorCode::kSingularG,
                "covariance matrix is not positive definite");
  }
  // Gamma = L' D L with the eigenvectors as rows of L.
  const Mat L = eig.eigenvectors().transpose();
  const Vec d = eig.eigenvalues();
  const Mat V = d.cwiseSqrt().cwiseInverse().asDiagonal() * L;
  const Mat V_inv = L.transpose() * d.cwiseSqrt().asDiagonal();

  SkewSymmetryReport r;
  r.Theta = geom.normals * V_inv;
  for (Eigen::Index j = 0; j < J; ++j) r.Theta.row(j).normalize();
  r.R = V;
  for (Eigen::Index j = 0; j < J; ++j) {
    r.R.col(j) /= r.Theta.row(j).dot(V.col(j));
  }
  r.Xi = (r.R - r.Theta.transpose()).transpose();
  r.residual = r.Theta * r.Xi.transpose() + r.Xi * r.Theta.transpose();
  r.norm = r.residual.norm();
  return r;
}

double ProductFormDensity(const ConeGeometry& geom, const Vec& w) {
  if (!geom.unit_weights) {
    throw Error(kModule, ErrorCode::kNotApplicable,
                "the product-form density requires kappa = 1 on every route");
  }
  RequireInCone(geom, w);
  return std::exp(geom.v.dot(w));
}

WedgeSlopes ComputeWedgeSlopes(const NetworkSpec& spec) {
  ValidateNetwork(spec);
  Mat expected(2, 3);
  expected << 1, 0, 1, 0, 1, 1;
  if (spec.A.rows() != 2 || spec.A.cols() != 3 || spec.A != expected) {
    throw Error(kModule, ErrorCode::kTopologyMismatch,
                "wedge slopes need two resources with routes {1}, {2}, {1,2}");
  }
  const double a = spec.alpha;
  // Per-route coefficient nu_i / (mu_i^2 kappa_i^(1/alpha)) of q^(1/alpha).
  auto c = [&](Eigen::Index i) {
    return spec.nu[i] / (spec.mu[i] * spec.mu[i] * std::pow(spec.kappa[i], 1.0 / a));
  };
  return {1.0 + c(1) / c(2), 1.0 + c(0) / c(2)};
}

}  // namespace bwshare
