#pragma once

#include <Eigen/Dense>

namespace ddrbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace ddrbf
