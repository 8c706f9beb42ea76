#pragma once

// Forward kernels shared by the tape ops and by inference. Reductions
// accumulate in double regardless of Scalar.

#include "tiger/graph_types.hpp"
#include "tiger/numerics/matrix.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace tiger {

/// S = D~^{-1/2} (A + I) D~^{-1/2} in CSR layout.
template <typename Scalar>
SparseMatrix<Scalar> sym_normalize(const AdjacencyMatrix& adj) {
  const auto n = adj.n;
  auto deg = adj.degrees();
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(i)] + 1));
  }
  std::vector<Eigen::Triplet<Scalar, int>> trips;
  trips.reserve(static_cast<std::size_t>(n) + 2 * adj.edges.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(i)];
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), static_cast<Scalar>(v));
  }
  for (auto [i, j] : adj.edges) {
    const double v = inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(j)];
    trips.emplace_back(static_cast<int>(i), static_cast<int>(j), static_cast<Scalar>(v));
    trips.emplace_back(static_cast<int>(j), static_cast<int>(i), static_cast<Scalar>(v));
  }
  SparseMatrix<Scalar> s(static_cast<int>(n), static_cast<int>(n));
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return s;
}

/// Binary feature matrix as a sparse n x m operand.
template <typename Scalar>
SparseMatrix<Scalar> to_sparse(const FeatureMatrix& x) {
  std::vector<Eigen::Triplet<Scalar, int>> trips;
  trips.reserve(x.ones.size());
  for (auto [i, j] : x.ones) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), Scalar(1));
  SparseMatrix<Scalar> s(static_cast<int>(x.n), static_cast<int>(x.m));
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return s;
}

template <typename Scalar>
Matrix<Scalar> spmm(const SparseMatrix<Scalar>& s, const Matrix<Scalar>& z) {
  if (s.cols() != z.rows()) {
    throw NumericError("spmm: shape mismatch " + shape_str(s.rows(), s.cols()) + " * " +
                       shape_str(z.rows(), z.cols()));
  }
  return s * z;
}

template <typename Scalar>
Matrix<Scalar> relu(const Matrix<Scalar>& z) {
  return z.cwiseMax(Scalar(0));
}

template <typename Scalar>
Matrix<Scalar> gram(const Matrix<Scalar>& z) {
  return z * z.transpose();
}

template <typename Scalar>
Matrix<Scalar> centering(Eigen::Index n) {
  Matrix<Scalar> r = Matrix<Scalar>::Constant(n, n, Scalar(-1.0 / static_cast<double>(n)));
  r.diagonal().array() += Scalar(1);
  return r;
}

/// Subtracts column means: R * Z without materializing R.
template <typename Scalar>
Matrix<double> center_rows(const Matrix<Scalar>& z) {
  Matrix<double> c = z.template cast<double>();
  if (c.rows() == 0) return c;
  const RowVector<double> mean = c.colwise().mean();
  c.rowwise() -= mean;
  return c;
}

/// HSIC with inner-product kernels, (n-1)^-2 tr(R K1 R K2), evaluated as
/// (n-1)^-2 ||(R Z1)^T (R Z2)||_F^2.
template <typename Scalar>
double hsic(const Matrix<Scalar>& z1, const Matrix<Scalar>& z2) {
  if (z1.rows() != z2.rows()) throw NumericError("hsic: row count mismatch");
  const auto n = z1.rows();
  if (n < 2) throw NumericError("hsic: needs at least 2 rows, got " + std::to_string(n));
  const Matrix<double> cross = center_rows(z1).transpose() * center_rows(z2);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  return cross.squaredNorm() / denom;
}

template <typename Scalar>
double frob_sq_diff(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  require_same_shape(a, b, "frob_sq_diff");
  return (a.template cast<double>() - b.template cast<double>()).squaredNorm();
}

template <typename Scalar>
double logsumexp(std::span<const Scalar> scores) {
  if (scores.empty()) return -std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (auto s : scores) mx = std::max(mx, static_cast<double>(s));
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (auto s : scores) acc += std::exp(static_cast<double>(s) - mx);
  return mx + std::log(acc);
}

template <typename Derived>
double logsumexp_row(const Eigen::MatrixBase<Derived>& row) {
  using S = typename Derived::Scalar;
  std::vector<S> tmp(static_cast<std::size_t>(row.size()));
  for (Eigen::Index i = 0; i < row.size(); ++i) tmp[static_cast<std::size_t>(i)] = row(i);
  return logsumexp(std::span<const S>(tmp));
}

}  // namespace tiger
