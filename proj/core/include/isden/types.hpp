#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace isden {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One vectorized patch per row, pixels in row-major order.
using PatchMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace isden
