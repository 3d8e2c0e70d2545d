#ifndef BWSHARE_TYPES_HPP
#define BWSHARE_TYPES_HPP

#include <Eigen/Dense>

namespace bwshare {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace bwshare

#endif  // BWSHARE_TYPES_HPP
