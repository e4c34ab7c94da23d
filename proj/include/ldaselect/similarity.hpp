#pragma once

#include <string>

#include <Eigen/Dense>

#include "ldaselect/errors.hpp"

namespace ldaselect {

namespace detail {

inline Eigen::MatrixXd normalize_rows_or_throw(Eigen::MatrixXd m, const std::string& what) {
  Eigen::VectorXd norms = m.rowwise().norm();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (!(norms[r] > 0.0)) throw ValidationError(what + ": zero-norm row " + std::to_string(r));
  m.array().colwise() /= norms.array();
  return m;
}

}  // namespace detail

// Cosine similarities between all row pairs of one matrix; scale of the
// rows is irrelevant by construction.
template <typename Derived>
Eigen::MatrixXd row_cosine_matrix(const Eigen::MatrixBase<Derived>& m) {
  Eigen::MatrixXd a =
      detail::normalize_rows_or_throw(m.derived().template cast<double>(), "cosine similarity");
  return a * a.transpose();
}

// Cosine similarities between the rows of two matrices sharing a column
// dimension; result is rows(a) x rows(b).
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXd cross_cosine_matrix(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols())
    throw ValidationError("cosine similarity: column dimensions differ (" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  Eigen::MatrixXd an =
      detail::normalize_rows_or_throw(a.derived().template cast<double>(), "cosine similarity");
  Eigen::MatrixXd bn =
      detail::normalize_rows_or_throw(b.derived().template cast<double>(), "cosine similarity");
  return an * bn.transpose();
}

}  // namespace ldaselect
