#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace fsel {

// Dense row-major storage: instances are rows, so row access must be
// contiguous for the per-point scans used throughout.
template <class Scalar>
using DenseMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// All internal arithmetic is 64-bit, even where file formats store float32.
using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using Index = Eigen::Index;

inline constexpr int kFormatVersion = 1;

}  // namespace fsel
