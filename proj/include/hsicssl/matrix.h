#pragma once

#include <Eigen/Dense>

namespace hsicssl {

// Row-major storage so that one sample is contiguous and CSV / checkpoint
// serialization is a straight walk over memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace hsicssl
