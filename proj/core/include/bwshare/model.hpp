#ifndef BWSHARE_MODEL_HPP
#define BWSHARE_MODEL_HPP

#include <cstddef>
#include <vector>

#include "bwshare/types.hpp"

namespace bwshare {

// A flow-level network: J resources, I routes.
//
//   A      J x I nonnegative coefficients (0/1 incidence for single-path
//          networks, general after multi-path reduction)
//   C      capacities, nu arrival rates, mu inverse mean document sizes,
//   kappa  policy weights, alpha fairness parameter.
//
// Loads rho_i = nu_i / mu_i are always derived, never stored.
struct NetworkSpec {
  Mat A;
  Vec C;
  Vec nu;
  Vec mu;
  Vec kappa;
  double alpha = 1.0;

  std::size_t routes() const { return static_cast<std::size_t>(A.cols()); }
  std::size_t resources() const { return static_cast<std::size_t>(A.rows()); }
  Vec rho() const { return nu.cwiseQuotient(mu); }
  // A * rho, the nominal load per resource.
  Vec load() const { return A * rho(); }
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kCriticalTolerance = 1e-10;

// Throws Error{kDimensionMismatch | kRankDeficient | kEmptyRoute |
// kNonPositiveParameter}. Rank is computed with column-pivoted QR.
const NetworkSpec& ValidateNetwork(const NetworkSpec& spec);

// True when |A rho - C| <= kCriticalTolerance * max(1, |C|) componentwise.
bool IsCriticallyLoaded(const NetworkSpec& spec);

// w_j = sum_i A_ji n_i / mu_i.
Vec Workload(const NetworkSpec& spec, const Vec& n);

struct HeavyTrafficSequence {
  NetworkSpec base;
  Vec theta;
  // delta = A'(AA')^{-1} theta, the minimum-norm solution of A delta = theta.
  Vec delta;
  std::vector<double> r_values;
  // One network per r: mu held fixed, nu^r = nu + diag(mu) delta / r.
  std::vector<NetworkSpec> per_r;
};

HeavyTrafficSequence BuildHeavyTrafficSequence(const NetworkSpec& base,
                                               const Vec& theta,
                                               const std::vector<double>& r_values);

// One network of the sequence, without building the whole list.
NetworkSpec HeavyTrafficNetwork(const NetworkSpec& base, const Vec& theta,
                                double r);

struct MixtureComponent {
  double fraction;
  double rate;
};

// Exponential extension of a network whose document sizes are finite mixtures
// of exponentials: route i is split into one copy per component, each copy
// keeping the A column and weight of i.
struct ExtendedNetwork {
  NetworkSpec spec;
  // origin[k] is the original route of copy k.
  std::vector<std::size_t> origin;
};

// mixtures[i] describes route i. Fractions must be positive and sum to 1
// (tolerance 1e-12), rates positive, and the mixture mean sum f/rate must
// equal 1/mu_i to relative 1e-12. Throws Error{kMixtureInvalid}.
ExtendedNetwork ExtendMixture(const NetworkSpec& spec,
                              const std::vector<std::vector<MixtureComponent>>& mixtures);

// Collapses copies back: nu_i = sum of copy rates, 1/mu_i the nu-weighted
// mean of copy mean sizes.
NetworkSpec CollapseMixture(const ExtendedNetwork& extended);

// Sums copy-level vectors (flow counts, means) back onto original routes.
Vec CollapseCounts(const ExtendedNetwork& extended, const Vec& per_copy);

// Linear network with J resources and J + 1 routes: route j (j < J) uses
// resource j only, the last route uses every resource. For J = 2 this is
// A = [[1,0,1],[0,1,1]].
NetworkSpec LinearNetwork(std::size_t J, const Vec& nu, const Vec& mu,
                          const Vec& kappa, double alpha, const Vec& C);

}  // namespace bwshare

#endif  // BWSHARE_MODEL_HPP
