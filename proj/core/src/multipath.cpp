#include "bwshare/multipath.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "bwshare/detail/simplex.hpp"
#include "bwshare/error.hpp"

namespace bwshare {
namespace {

constexpr const char* kModule = "multipath";
constexpr std::size_t kWarnEliminated = 20;

using Rational = boost::multiprecision::cpp_rational;
using RVec = std::vector<Rational>;

[[noreturn]] void Fail(ErrorCode code, const std::string& what) {
  throw Error(kModule, code, what);
}

// Exact value of a finite double.
Rational ToRational(double x) {
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto digits = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  boost::multiprecision::cpp_int scale = 1;
  scale <<= std::abs(exponent);
  Rational r(digits);
  return exponent >= 0 ? r * Rational(scale) : r / Rational(scale);
}

// a . x <= b. origin marks the input inequalities combined into this row.
struct Row {
  RVec a;
  Rational b;
  std::vector<bool> origin;
};

Rational MaxAbs(const RVec& a) {
  Rational m = 0;
  for (const auto& v : a) {
    const Rational x = abs(v);
    if (x > m) m = x;
  }
  return m;
}

// Scales a row so its largest absolute coefficient is 1. Rows without
// variables are left alone.
void Canonicalize(Row& row) {
  const Rational m = MaxAbs(row.a);
  if (m == 0) return;
  for (auto& v : row.a) v /= m;
  row.b /= m;
}

std::size_t Count(const std::vector<bool>& bits) {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

// Removes duplicates and rows without variables (these are 0 <= b with b >= 0
// for the systems built here). Keeps first-occurrence order; a duplicate with
// a smaller origin set replaces the earlier copy's origin.
std::vector<Row> Tidy(std::vector<Row> rows) {
  std::vector<Row> out;
  std::map<std::pair<RVec, Rational>, std::size_t> seen;
  for (auto& row : rows) {
    Canonicalize(row);
    if (MaxAbs(row.a) == 0) {
      if (row.b < 0) Fail(ErrorCode::kInvalidMultipath, "capacity region is empty");
      continue;
    }
    auto [it, inserted] = seen.try_emplace({row.a, row.b}, out.size());
    if (!inserted) {
      Row& kept = out[it->second];
      if (Count(row.origin) < Count(kept.origin)) kept.origin = row.origin;
      continue;
    }
    out.push_back(std::move(row));
  }
  return out;
}

// One Fourier-Motzkin step on variable v. After `done` eliminations, a row
// built from more than done + 1 input inequalities is redundant (Chernikov's
// rule) and is dropped.
std::vector<Row> Eliminate(const std::vector<Row>& rows, std::size_t v,
                           std::size_t done, std::size_t cap) {
  std::vector<const Row*> pos, neg;
  std::vector<Row> out;
  for (const auto& row : rows) {
    if (row.a[v] > 0) {
      pos.push_back(&row);
    } else if (row.a[v] < 0) {
      neg.push_back(&row);
    } else {
      out.push_back(row);
    }
  }
  if (out.size() + pos.size() * neg.size() > cap) {
    Fail(ErrorCode::kEliminationBlowup,
         "Fourier-Motzkin system exceeds " + std::to_string(cap) + " inequalities");
  }
  for (const Row* p : pos) {
    for (const Row* n : neg) {
      std::vector<bool> origin(p->origin.size());
      for (std::size_t t = 0; t < origin.size(); ++t) origin[t] = p->origin[t] || n->origin[t];
      if (Count(origin) > done + 1) continue;
      const Rational sp = -n->a[v];
      const Rational sn = p->a[v];
      Row r{RVec(p->a.size()), sp * p->b + sn * n->b, std::move(origin)};
      for (std::size_t c = 0; c < r.a.size(); ++c) {
        r.a[c] = sp * p->a[c] + sn * n->a[c];
      }
      r.a[v] = 0;
      out.push_back(std::move(r));
    }
  }
  return Tidy(std::move(out));
}

// Rank of a list of rational vectors by exact Gaussian elimination.
std::size_t Rank(std::vector<RVec> m) {
  if (m.empty()) return 0;
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][c] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

// Unique solution of the square system, if any.
std::optional<RVec> SolveExact(std::vector<RVec> m, RVec rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && m[pivot][c] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(m[c], m[pivot]);
    std::swap(rhs[c], rhs[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t c = 0; c < n; ++c) rhs[c] /= m[c][c];
  return rhs;
}

// Calls visit with every k-subset of {0, ..., n-1} in lexicographic order.
void ForEachSubset(std::size_t n, std::size_t k,
                   const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Vertices of {x >= 0 : rows}, assumed bounded.
std::vector<RVec> ExactVertices(const std::vector<Row>& rows, std::size_t dim) {
  std::vector<Row> all = rows;
  for (std::size_t i = 0; i < dim; ++i) {
    Row r{RVec(dim, Rational(0)), Rational(0), {}};
    r.a[i] = -1;
    all.push_back(std::move(r));
  }
  std::vector<RVec> vertices;
  ForEachSubset(all.size(), dim, [&](const std::vector<std::size_t>& pick) {
    std::vector<RVec> m;
    RVec rhs;
    for (std::size_t p : pick) {
      m.push_back(all[p].a);
      rhs.push_back(all[p].b);
    }
    auto x = SolveExact(std::move(m), std::move(rhs));
    if (!x) return;
    for (const auto& row : all) {
      Rational lhs = 0;
      for (std::size_t c = 0; c < dim; ++c) lhs += row.a[c] * (*x)[c];
      if (lhs > row.b) return;
    }
    if (std::find(vertices.begin(), vertices.end(), *x) == vertices.end()) {
      vertices.push_back(std::move(*x));
    }
  });
  return vertices;
}

void CheckParameter(const Vec& v, std::size_t n, const char* name) {
  if (v.size() == 0) return;
  if (static_cast<std::size_t>(v.size()) != n) {
    Fail(ErrorCode::kDimensionMismatch, std::string(name) + " must have one entry per pair");
  }
  if (!(v.array() > 0.0).all() || !v.allFinite()) {
    Fail(ErrorCode::kInvalidMultipath, std::string(name) + " must be positive");
  }
}

}  // namespace

void ValidateMultipath(const MultipathSpec& spec) {
  const Eigen::Index I = spec.H.rows();
  const Eigen::Index K = spec.H.cols();
  const Eigen::Index L = spec.Abar.rows();
  if (I == 0 || K == 0 || L == 0) {
    Fail(ErrorCode::kDimensionMismatch, "H and Abar must be non-empty");
  }
  if (spec.Abar.cols() != K) {
    Fail(ErrorCode::kDimensionMismatch, "Abar must have one column per route");
  }
  if (spec.Cbar.size() != L) {
    Fail(ErrorCode::kDimensionMismatch, "Cbar must have one entry per resource");
  }
  auto zero_one = [](const Mat& m) {
    return ((m.array() == 0.0) || (m.array() == 1.0)).all();
  };
  if (!zero_one(spec.H) || !zero_one(spec.Abar)) {
    Fail(ErrorCode::kInvalidMultipath, "H and Abar must be zero-one matrices");
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (spec.H.col(k).sum() != 1.0) {
      std::ostringstream os;
      os << "route " << k << " must belong to exactly one pair";
      Fail(ErrorCode::kInvalidMultipath, os.str());
    }
    if (spec.Abar.col(k).sum() == 0.0) {
      std::ostringstream os;
      os << "route " << k << " uses no resource";
      Fail(ErrorCode::kInvalidMultipath, os.str());
    }
  }
  for (Eigen::Index i = 0; i < I; ++i) {
    if (spec.H.row(i).sum() == 0.0) {
      std::ostringstream os;
      os << "pair " << i << " has no route";
      Fail(ErrorCode::kInvalidMultipath, os.str());
    }
  }
  if (!(spec.Cbar.array() > 0.0).all() || !spec.Cbar.allFinite()) {
    Fail(ErrorCode::kInvalidMultipath, "Cbar must be positive");
  }
  const auto pairs = static_cast<std::size_t>(I);
  CheckParameter(spec.nu, pairs, "nu");
  CheckParameter(spec.mu, pairs, "mu");
  CheckParameter(spec.kappa, pairs, "kappa");
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    Fail(ErrorCode::kInvalidMultipath, "alpha must be positive");
  }
}

ReducedRepresentation Project(const MultipathSpec& spec, const ProjectOptions& options) {
  ValidateMultipath(spec);
  const std::size_t I = spec.pairs();
  const std::size_t K = spec.paths();
  const auto L = static_cast<std::size_t>(spec.Abar.rows());

  // Each pair's first route is written as Lambda_i minus its other routes;
  // the remaining K - I route variables are eliminated.
  std::vector<std::vector<std::size_t>> routes_of(I);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < I; ++i) {
      if (spec.H(i, k) == 1.0) routes_of[i].push_back(k);
    }
  }
  const std::size_t dim = I + K - I;
  std::vector<RVec> y(K, RVec(dim, Rational(0)));  // y_k as a linear form
  std::size_t next = I;
  std::vector<std::size_t> eliminated;
  for (std::size_t i = 0; i < I; ++i) {
    const auto& rs = routes_of[i];
    y[rs[0]][i] = 1;
    for (std::size_t t = 1; t < rs.size(); ++t) {
      y[rs[t]][next] = 1;
      y[rs[0]][next] = -1;
      eliminated.push_back(next++);
    }
  }

  std::vector<Row> rows;
  for (std::size_t k = 0; k < K; ++k) {
    Row r{RVec(dim), Rational(0), {}};
    for (std::size_t c = 0; c < dim; ++c) r.a[c] = -y[k][c];
    rows.push_back(std::move(r));
  }
  for (std::size_t l = 0; l < L; ++l) {
    Row r{RVec(dim, Rational(0)), ToRational(spec.Cbar[static_cast<Eigen::Index>(l)]), {}};
    for (std::size_t k = 0; k < K; ++k) {
      const Rational coef = ToRational(spec.Abar(static_cast<Eigen::Index>(l),
                                                 static_cast<Eigen::Index>(k)));
      if (coef == 0) continue;
      for (std::size_t c = 0; c < dim; ++c) r.a[c] += coef * y[k][c];
    }
    rows.push_back(std::move(r));
  }
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].origin.assign(rows.size(), false);
    rows[t].origin[t] = true;
  }
  rows = Tidy(std::move(rows));

  ReducedRepresentation out;
  if (eliminated.size() > kWarnEliminated) {
    out.warnings.push_back("eliminating " + std::to_string(eliminated.size()) +
                           " route variables; Fourier-Motzkin may be slow");
  }

  // Eliminate the variable with the fewest generated rows first.
  std::size_t done = 1;
  while (!eliminated.empty()) {
    std::size_t best = 0;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t e = 0; e < eliminated.size(); ++e) {
      std::size_t p = 0, n = 0;
      for (const auto& row : rows) {
        if (row.a[eliminated[e]] > 0) ++p;
        if (row.a[eliminated[e]] < 0) ++n;
      }
      if (p * n < best_cost) {
        best_cost = p * n;
        best = e;
      }
    }
    rows = Eliminate(rows, eliminated[best], done++, options.max_inequalities);
    eliminated.erase(eliminated.begin() + static_cast<std::ptrdiff_t>(best));
  }

  // Restrict to the Lambda coordinates. Rows through the origin or with no
  // positive coefficient are implied by Lambda >= 0 on a down-closed set.
  std::vector<Row> reduced;
  for (auto& row : rows) {
    Row r{RVec(row.a.begin(), row.a.begin() + static_cast<std::ptrdiff_t>(I)), row.b, {}};
    const bool has_positive =
        std::any_of(r.a.begin(), r.a.end(), [](const Rational& v) { return v > 0; });
    if (r.b > 0 && has_positive) reduced.push_back(std::move(r));
  }
  reduced = Tidy(std::move(reduced));
  for (auto& r : reduced) {
    const Rational m = *std::max_element(r.a.begin(), r.a.end());
    for (auto& v : r.a) v /= m;
    r.b /= m;
  }

  const std::vector<RVec> vertices = ExactVertices(reduced, I);
  std::vector<Row> facets;
  for (const auto& r : reduced) {
    std::vector<const RVec*> tight;
    for (const auto& v : vertices) {
      Rational lhs = 0;
      for (std::size_t c = 0; c < I; ++c) lhs += r.a[c] * v[c];
      if (lhs == r.b) tight.push_back(&v);
    }
    if (tight.empty()) continue;
    std::vector<RVec> diffs;
    for (std::size_t t = 1; t < tight.size(); ++t) {
      RVec d(I);
      for (std::size_t c = 0; c < I; ++c) d[c] = (*tight[t])[c] - (*tight[0])[c];
      diffs.push_back(std::move(d));
    }
    if (Rank(std::move(diffs)) + 1 != I) continue;
    facets.push_back(r);
    Vec centroid = Vec::Zero(static_cast<Eigen::Index>(I));
    for (const RVec* v : tight) {
      for (std::size_t c = 0; c < I; ++c) {
        centroid[static_cast<Eigen::Index>(c)] += static_cast<double>((*v)[c]);
      }
    }
    out.certificate.push_back(centroid / static_cast<double>(tight.size()));
  }

  const auto J = static_cast<Eigen::Index>(facets.size());
  out.A.resize(J, static_cast<Eigen::Index>(I));
  out.C.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const Row& r = facets[static_cast<std::size_t>(j)];
    std::vector<std::string> coefs;
    for (std::size_t c = 0; c < I; ++c) {
      out.A(j, static_cast<Eigen::Index>(c)) = static_cast<double>(r.a[c]);
      coefs.push_back(r.a[c].str());
    }
    out.A_exact.push_back(std::move(coefs));
    out.C[j] = static_cast<double>(r.b);
    out.C_exact.push_back(r.b.str());
  }
  return out;
}

NetworkSpec ReducedNetwork(const MultipathSpec& spec, const ReducedRepresentation& reduced) {
  ValidateMultipath(spec);
  const auto I = static_cast<Eigen::Index>(spec.pairs());
  if (spec.nu.size() != I || spec.mu.size() != I || spec.kappa.size() != I) {
    Fail(ErrorCode::kDimensionMismatch, "nu, mu and kappa are required per pair");
  }
  if (reduced.A.cols() != I || reduced.A.rows() != reduced.C.size()) {
    Fail(ErrorCode::kDimensionMismatch, "reduced representation does not match the pairs");
  }
  NetworkSpec net;
  net.A = reduced.A;
  net.C = reduced.C;
  net.nu = spec.nu;
  net.mu = spec.mu;
  net.kappa = spec.kappa;
  net.alpha = spec.alpha;
  return net;
}

LocalTrafficReport LocalTrafficCheck(const Mat& A) {
  LocalTrafficReport report;
  report.holds = A.rows() > 0;
  for (Eigen::Index j = 0; j < A.rows(); ++j) {
    std::optional<std::size_t> witness;
    for (Eigen::Index i = 0; i < A.cols() && !witness; ++i) {
      if (!(A(j, i) > 0.0)) continue;
      bool alone = true;
      for (Eigen::Index k = 0; k < A.rows(); ++k) {
        if (k != j && A(k, i) != 0.0) alone = false;
      }
      if (alone) witness = static_cast<std::size_t>(i);
    }
    report.holds = report.holds && witness.has_value();
    report.witness.push_back(witness);
  }
  return report;
}

std::vector<Vec> PolytopeVertices(const Mat& A, const Vec& C, double tolerance) {
  const Eigen::Index n = A.cols();
  if (A.rows() != C.size()) {
    Fail(ErrorCode::kDimensionMismatch, "A and C disagree in the number of rows");
  }
  if (n == 0) return {Vec()};
  // Unbounded iff some direction d >= 0, d != 0 has A d <= 0.
  Mat ray(A.rows() + 1, n);
  ray << -A, Mat::Ones(1, n);
  Vec rhs = Vec::Zero(A.rows() + 1);
  rhs[A.rows()] = 1.0;
  if (detail::FindNonnegativeSolution(ray, rhs)) {
    Fail(ErrorCode::kUnbounded, "polytope is unbounded");
  }

  Mat all(A.rows() + n, n);
  all << A, -Mat::Identity(n, n);
  Vec b(A.rows() + n);
  b << C, Vec::Zero(n);
  const Vec slack_tol = tolerance * b.cwiseAbs().cwiseMax(1.0);
  std::vector<Vec> vertices;
  ForEachSubset(static_cast<std::size_t>(all.rows()), static_cast<std::size_t>(n),
                [&](const std::vector<std::size_t>& pick) {
                  Mat m(n, n);
                  Vec r(n);
                  for (Eigen::Index t = 0; t < n; ++t) {
                    const auto row = static_cast<Eigen::Index>(pick[static_cast<std::size_t>(t)]);
                    m.row(t) = all.row(row);
                    r[t] = b[row];
                  }
                  Eigen::FullPivLU<Mat> lu(m);
                  lu.setThreshold(1e-12);
                  if (!lu.isInvertible()) return;
                  const Vec x = lu.solve(r);
                  if (((all * x - b).array() > slack_tol.array()).any()) return;
                  for (const auto& v : vertices) {
                    if ((v - x).cwiseAbs().maxCoeff() <= tolerance * std::max(1.0, x.cwiseAbs().maxCoeff())) {
                      return;
                    }
                  }
                  vertices.push_back(x);
                });
  return vertices;
}

bool PolytopesEqual(const Mat& A1, const Vec& C1, const Mat& A2, const Vec& C2,
                    double tolerance) {
  if (A1.cols() != A2.cols()) {
    Fail(ErrorCode::kDimensionMismatch, "polytopes live in different dimensions");
  }
  auto contained = [&](const std::vector<Vec>& vertices, const Mat& A, const Vec& C) {
    for (const auto& v : vertices) {
      const Vec excess = A * v - C;
      for (Eigen::Index j = 0; j < excess.size(); ++j) {
        if (excess[j] > tolerance * std::max(1.0, std::abs(C[j]))) return false;
      }
    }
    return true;
  };
  const auto v1 = PolytopeVertices(A1, C1, tolerance);
  const auto v2 = PolytopeVertices(A2, C2, tolerance);
  return contained(v1, A2, C2) && contained(v2, A1, C1);
}

}  // namespace bwshare
