#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fsel/core.hpp"

namespace fsel {

// Squared Euclidean distance between two row vectors (any Eigen expressions
// of matching size).
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar squared_distance(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  return (a.derived() - b.derived()).squaredNorm();
}

// Index of the row of `rows` nearest to `point` under squared Euclidean
// distance; ties resolve to the lowest row index.
template <class DerivedP, class DerivedR>
Index nearest_row(const Eigen::MatrixBase<DerivedP>& point,
                  const Eigen::MatrixBase<DerivedR>& rows,
                  typename DerivedR::Scalar* sq_dist_out = nullptr) {
  using Scalar = typename DerivedR::Scalar;
  Index best = 0;
  Scalar best_sq = squared_distance(point, rows.row(0));
  for (Index j = 1; j < rows.rows(); ++j) {
    const Scalar sq = squared_distance(point, rows.row(j));
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  if (sq_dist_out) *sq_dist_out = best_sq;
  return best;
}

// Sum of squared errors of an assignment: sum_i ||points.row(i) -
// centroids.row(assignment[i])||^2, accumulated in ascending point order.
template <class DerivedP, class DerivedC>
typename DerivedP::Scalar sse(const Eigen::MatrixBase<DerivedP>& points,
                              const Eigen::MatrixBase<DerivedC>& centroids,
                              const std::vector<int>& assignment) {
  using Scalar = typename DerivedP::Scalar;
  if (points.cols() != centroids.cols())
    throw std::invalid_argument(
        "sse: dimension mismatch: points have d=" + std::to_string(points.cols()) +
        ", centroids have d=" + std::to_string(centroids.cols()));
  if (static_cast<Index>(assignment.size()) != points.rows())
    throw std::invalid_argument(
        "sse: assignment length " + std::to_string(assignment.size()) +
        " does not match point count " + std::to_string(points.rows()));
  Scalar total = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    if (j < 0 || j >= centroids.rows())
      throw std::invalid_argument("sse: assignment[" + std::to_string(i) +
                                  "] = " + std::to_string(j) +
                                  " is out of range");
    total += squared_distance(points.row(i), centroids.row(j));
  }
  return total;
}

}  // namespace fsel
