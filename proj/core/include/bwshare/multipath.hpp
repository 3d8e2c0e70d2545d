#ifndef BWSHARE_MULTIPATH_HPP
#define BWSHARE_MULTIPATH_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/types.hpp"

namespace bwshare {

// Multi-path routing: K routes over L resources serve I source-destination
// pairs. H(i, k) = 1 iff route k belongs to pair i; every column of H has
// exactly one 1. Abar(l, k) = 1 iff route k uses resource l.
struct MultipathSpec {
  Mat H;
  Mat Abar;
  Vec Cbar;
  // Per-pair traffic parameters; optional for Project, required for
  // ReducedNetwork.
  Vec nu;
  Vec mu;
  Vec kappa;
  double alpha = 1.0;

  std::size_t pairs() const { return static_cast<std::size_t>(H.rows()); }
  std::size_t paths() const { return static_cast<std::size_t>(H.cols()); }
};

// Throws Error{kInvalidMultipath | kDimensionMismatch}.
void ValidateMultipath(const MultipathSpec& spec);

// {Lambda >= 0 : A Lambda <= C} = H Y with Y = {y >= 0 : Abar y <= Cbar}.
// Rows are scaled so their largest coefficient is 1. The exact rational form
// of each coefficient is kept alongside the doubles.
struct ReducedRepresentation {
  Mat A;
  Vec C;
  std::vector<std::vector<std::string>> A_exact;
  std::vector<std::string> C_exact;
  // certificate[j] lies on {A_j . Lambda = C_j} and in the relative interior
  // of the facet it cuts from H Y.
  std::vector<Vec> certificate;
  // Non-fatal notes, e.g. an elimination over more than 20 route variables.
  std::vector<std::string> warnings;
};

struct ProjectOptions {
  std::size_t max_inequalities = 100000;
};

// Fourier-Motzkin elimination of the route variables in exact rational
// arithmetic, followed by facet selection over the vertices of the result.
// Throws Error{kEliminationBlowup} when an intermediate system exceeds
// max_inequalities rows.
ReducedRepresentation Project(const MultipathSpec& spec,
                              const ProjectOptions& options = {});

// Network on the reduced representation, with the per-pair nu, mu, kappa.
NetworkSpec ReducedNetwork(const MultipathSpec& spec,
                           const ReducedRepresentation& reduced);

struct LocalTrafficReport {
  bool holds = false;
  // witness[j] is a column supported on row j only, if any.
  std::vector<std::optional<std::size_t>> witness;
};

LocalTrafficReport LocalTrafficCheck(const Mat& A);

// Vertices of the bounded polytope {x >= 0 : A x <= C}. Throws
// Error{kUnbounded} if some coordinate is unconstrained.
std::vector<Vec> PolytopeVertices(const Mat& A, const Vec& C,
                                  double tolerance = 1e-9);

// Mutual inclusion of two bounded polytopes {x >= 0 : A x <= C}, decided by
// maximizing every inequality of one system over the vertices of the other.
bool PolytopesEqual(const Mat& A1, const Vec& C1, const Mat& A2, const Vec& C2,
                    double tolerance = 1e-8);

}  // namespace bwshare

#endif  // BWSHARE_MULTIPATH_HPP
