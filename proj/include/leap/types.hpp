#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace leap {

using Token = std::int32_t;

// Backend tensors are binary32 and serialized row-major; storing them
// row-major keeps file IO a straight memcpy of .data().
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecF = Eigen::VectorXf;

// Probability vectors and chain math live in binary64.
using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;
using RowVecD = Eigen::RowVectorXd;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace leap
