#ifndef BWSHARE_DETAIL_SIMPLEX_HPP
#define BWSHARE_DETAIL_SIMPLEX_HPP

#include <optional>

#include "bwshare/types.hpp"

namespace bwshare::detail {

// Phase-one simplex (dense tableau, Bland's rule) for
//   { x >= 0 : A x >= b }.
// Returns a feasible point or nullopt. Intended for small problems.
std::optional<Vec> FindNonnegativeSolution(const Mat& A, const Vec& b);

}  // namespace bwshare::detail

#endif  // BWSHARE_DETAIL_SIMPLEX_HPP
