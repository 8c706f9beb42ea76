#pragma once

// Differentiable operations over Var. Each op computes its forward value with
// the kernels in kernels.hpp and registers a hand-derived backward closure.

#include "tiger/numerics/kernels.hpp"
#include "tiger/numerics/tape.hpp"

#include <cmath>
#include <vector>

namespace tiger {

namespace detail {
template <typename Scalar>
void require_same_tape(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.tape() != b.tape()) throw NumericError("operands recorded on different tapes");
}
}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw NumericError("matmul: shape mismatch " + shape_str(a.rows(), a.cols()) + " * " +
                       shape_str(b.rows(), b.cols()));
  }
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value(), {ia, ib}, [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

/// a * b^T
template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.cols()) {
    throw NumericError("matmul_nt: shape mismatch " + shape_str(a.rows(), a.cols()) + " * (" +
                       shape_str(b.rows(), b.cols()) + ")^T");
  }
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value().transpose(), {ia, ib},
                          [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
                            if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib));
                            if (t.needs_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
                          });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() + b.value(), {ia, ib}, [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() - b.value(), {ia, ib}, [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(ia, g);
    if (t.needs_grad(ib)) t.accumulate(ib, -g);
  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar s) {
  const int ia = a.id();
  return a.tape()->record(a.value() * s, {ia}, [ia, s](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(ia, g * s);
  });
}

/// Constant sparse operand times a dense Var. `s` must outlive the tape.
template <typename Scalar>
Var<Scalar> spmm(const SparseMatrix<Scalar>& s, const Var<Scalar>& z) {
  const int iz = z.id();
  const SparseMatrix<Scalar>* sp = &s;
  return z.tape()->record(spmm(s, z.value()), {iz}, [iz, sp](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    if (t.needs_grad(iz)) t.accumulate(iz, Matrix<Scalar>(sp->transpose() * g));
  });
}

/// Subgradient at exactly zero is zero.
template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& z) {
  const int iz = z.id();
  z.tape()->note_relu(z.value());
  return z.tape()->record(relu(z.value()), {iz}, [iz](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const auto& pre = t.value(iz);
    t.accumulate(iz, Matrix<Scalar>((pre.array() > Scalar(0)).select(g, Scalar(0))));
  });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& z) {
  const int iz = z.id();
  Matrix<Scalar> y = z.value().array().tanh().matrix();
  Matrix<Scalar> saved = y;
  return z.tape()->record(std::move(y), {iz}, [iz, saved = std::move(saved)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(iz, Matrix<Scalar>(g.array() * (Scalar(1) - saved.array().square())));
  });
}

template <typename Scalar>
Var<Scalar> gram(const Var<Scalar>& z) {
  const int iz = z.id();
  return z.tape()->record(gram(z.value()), {iz}, [iz](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(iz, (g + g.transpose()) * t.value(iz));
  });
}

template <typename Scalar>
Var<Scalar> hsic(const Var<Scalar>& z1, const Var<Scalar>& z2) {
  detail::require_same_tape(z1, z2);
  const double value = hsic(z1.value(), z2.value());
  const int i1 = z1.id(), i2 = z2.id();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(value);
  return z1.tape()->record(std::move(out), {i1, i2}, [i1, i2](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const auto n = t.value(i1).rows();
    const double coef = 2.0 * static_cast<double>(g(0, 0)) / (static_cast<double>(n - 1) * static_cast<double>(n - 1));
    const Matrix<double> c1 = center_rows(t.value(i1));
    const Matrix<double> c2 = center_rows(t.value(i2));
    const Matrix<double> cross = c1.transpose() * c2;
    // d/dZ1 = R * (2 c C2 M^T); C2 is already centered so R is a no-op.
    if (t.needs_grad(i1)) t.accumulate(i1, ((c2 * cross.transpose()) * coef).template cast<Scalar>());
    if (t.needs_grad(i2)) t.accumulate(i2, ((c1 * cross) * coef).template cast<Scalar>());
  });
}

template <typename Scalar>
Var<Scalar> frob_sq_diff(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_tape(a, b);
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(frob_sq_diff(a.value(), b.value()));
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {ia, ib}, [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const Matrix<Scalar> d = (t.value(ia) - t.value(ib)) * (Scalar(2) * g(0, 0));
    t.accumulate(ia, d);
    if (t.needs_grad(ib)) t.accumulate(ib, -d);
  });
}

/// Mean over rows i of [-s(i, gold[i]) + logsumexp_j s(i, j)].
template <typename Scalar>
Var<Scalar> softmax_xent(const Var<Scalar>& scores, std::vector<int> gold) {
  const auto& s = scores.value();
  if (static_cast<Eigen::Index>(gold.size()) != s.rows()) throw NumericError("softmax_xent: gold size mismatch");
  const auto n = s.rows();
  Matrix<Scalar> probs(s.rows(), s.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gold[static_cast<std::size_t>(i)] < 0 || gold[static_cast<std::size_t>(i)] >= s.cols()) {
      throw NumericError("softmax_xent: gold column out of range");
    }
    const double lse = logsumexp_row(s.row(i));
    total += lse - static_cast<double>(s(i, gold[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      probs(i, j) = static_cast<Scalar>(std::exp(static_cast<double>(s(i, j)) - lse));
    }
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(n > 0 ? total / static_cast<double>(n) : 0.0);
  const int is = scores.id();
  return scores.tape()->record(
      std::move(out), {is},
      [is, probs = std::move(probs), gold = std::move(gold)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> d = probs;
        for (std::size_t i = 0; i < gold.size(); ++i) d(static_cast<Eigen::Index>(i), gold[i]) -= Scalar(1);
        d *= g(0, 0) / static_cast<Scalar>(gold.size());
        t.accumulate(is, d);
      });
}

/// In-batch entity-linking loss: square score matrix, gold on the diagonal.
template <typename Scalar>
Var<Scalar> el_loss(const Var<Scalar>& scores) {
  if (scores.rows() != scores.cols()) {
    throw NumericError("el_loss: score matrix must be square, got " + shape_str(scores.rows(), scores.cols()));
  }
  std::vector<int> gold(static_cast<std::size_t>(scores.rows()));
  for (std::size_t i = 0; i < gold.size(); ++i) gold[i] = static_cast<int>(i);
  return softmax_xent(scores, std::move(gold));
}

template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& a) {
  const auto& x = a.value();
  Matrix<Scalar> y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double lse = logsumexp_row(x.row(i));
    for (Eigen::Index j = 0; j < x.cols(); ++j) y(i, j) = static_cast<Scalar>(std::exp(static_cast<double>(x(i, j)) - lse));
  }
  const int ia = a.id();
  Matrix<Scalar> saved = y;
  return a.tape()->record(std::move(y), {ia}, [ia, saved = std::move(saved)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const Matrix<Scalar> dot = (g.array() * saved.array()).rowwise().sum().matrix();
    Matrix<Scalar> d = saved.array() * (g.colwise() - dot.col(0)).array();
    t.accumulate(ia, d);
  });
}

template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& a, std::vector<int> rows) {
  const auto& x = a.value();
  Matrix<Scalar> y(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= x.rows()) throw NumericError("gather_rows: row index out of range");
    y.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
  }
  const int ia = a.id();
  return a.tape()->record(std::move(y), {ia}, [ia, rows = std::move(rows)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate_rows(ia, rows, g);
  });
}

template <typename Scalar>
Var<Scalar> row(const Var<Scalar>& a, int i) {
  return gather_rows(a, std::vector<int>{i});
}

template <typename Scalar>
Var<Scalar> stack_rows(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw NumericError("stack_rows: no inputs");
  const auto cols = parts.front().cols();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw NumericError("stack_rows: column mismatch");
    total += p.rows();
  }
  Matrix<Scalar> y(total, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    y.middleRows(off, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.rows();
  }
  return parts.front().tape()->record(std::move(y), ids, [ids, offsets](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleRows(offsets[k], t.value(ids[k]).rows()));
    }
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw NumericError("concat_cols: no inputs");
  const auto rows = parts.front().rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw NumericError("concat_cols: row mismatch");
    total += p.cols();
  }
  Matrix<Scalar> y(rows, total);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    y.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.cols();
  }
  return parts.front().tape()->record(std::move(y), ids, [ids, offsets](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleCols(offsets[k], t.value(ids[k]).cols()));
    }
  });
}

template <typename Scalar>
Var<Scalar> mean_rows(const Var<Scalar>& a) {
  const auto n = a.rows();
  if (n == 0) throw NumericError("mean_rows: empty input");
  const int ia = a.id();
  return a.tape()->record(a.value().colwise().mean(), {ia}, [ia, n](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(ia, g.replicate(n, 1) / static_cast<Scalar>(n));
  });
}

/// Sum of all entries, as a 1x1.
template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(a.value().template cast<double>().sum());
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return a.tape()->record(std::move(out), {ia}, [ia, r, c](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(ia, Matrix<Scalar>::Constant(r, c, g(0, 0)));
  });
}

}  // namespace tiger
