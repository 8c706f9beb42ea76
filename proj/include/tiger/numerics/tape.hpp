#pragma once

// Reverse-mode tape. Operations append nodes in evaluation order; backward()
// walks them once in reverse, accumulating gradients additively at fan-out.
// A tape belongs to a single thread and a single training step.

#include "tiger/numerics/matrix.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tiger {

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Matrix<Scalar> v) : name(std::move(n)), value(std::move(v)) { zero_grad(); }

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
class Tape;

template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, int id) : tape_(tape), id_(id) {}

  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Scalar scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape<Scalar>* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<Scalar>* tape_ = nullptr;
  int id_ = -1;
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const Mat& grad_out)>;

  Tape() = default;
  /// With record_grad = false parameters are read-only inputs and no
  /// backward closures are kept (inference).
  explicit Tape(bool record_grad) : record_grad_(record_grad) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Mat value) {
    nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  /// Leaf bound to a parameter; repeated calls return the same node.
  Var<Scalar> leaf(Parameter<Scalar>& p) {
    if (auto it = leaves_.find(&p); it != leaves_.end()) return {this, it->second};
    nodes_.push_back(Node{{}, {}, {}, &p, record_grad_ && p.trainable});
    const int id = static_cast<int>(nodes_.size()) - 1;
    leaves_.emplace(&p, id);
    return {this, id};
  }

  /// Appends an op result. `inputs` decide whether the node needs a gradient.
  Var<Scalar> record(Mat value, std::initializer_list<int> inputs, Backward backward) {
    bool needs = false;
    for (int i : inputs) needs = needs || nodes_[static_cast<std::size_t>(i)].needs_grad;
    return push(std::move(value), needs, std::move(backward));
  }

  Var<Scalar> record(Mat value, const std::vector<int>& inputs, Backward backward) {
    bool needs = false;
    for (int i : inputs) needs = needs || nodes_[static_cast<std::size_t>(i)].needs_grad;
    return push(std::move(value), needs, std::move(backward));
  }

  const Mat& value(int id) const {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    return node.param != nullptr ? node.param->value : node.value;
  }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  template <typename Expr>
  void accumulate(int id, const Expr& g) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  /// Adds g into selected rows of node `id`.
  void accumulate_rows(int id, const std::vector<int>& rows, const Mat& g) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0) node.grad.setZero(value(id).rows(), value(id).cols());
    for (std::size_t k = 0; k < rows.size(); ++k) node.grad.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
  }

  /// Seeds d(root)/d(root) = 1 and propagates to every parameter leaf.
  void backward(Var<Scalar> root) {
    if (root.rows() != 1 || root.cols() != 1) {
      throw NumericError("backward: root must be 1x1, got " + shape_str(root.rows(), root.cols()));
    }
    accumulate(root.id(), Mat::Ones(1, 1));
    for (int i = root.id(); i >= 0; --i) {
      auto& node = nodes_[static_cast<std::size_t>(i)];
      if (node.grad.size() == 0) continue;
      if (node.param != nullptr) {
        node.param->grad += node.grad;
      } else if (node.backward) {
        node.backward(*this, node.grad);
      }
      ++visited_;
    }
  }

  /// Sign pattern of every relu input seen so far; a change between two
  /// evaluations means a kink was crossed.
  void note_relu(const Mat& pre) {
    if (!record_grad_) return;
    for (Eigen::Index i = 0; i < pre.size(); ++i) relu_signature_.push_back(pre.data()[i] > Scalar(0) ? 1 : 0);
  }
  const std::vector<std::uint8_t>& relu_signature() const { return relu_signature_; }

  std::size_t size() const { return nodes_.size(); }
  std::size_t visited() const { return visited_; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backward backward;
    Parameter<Scalar>* param = nullptr;
    bool needs_grad = false;
  };

  Var<Scalar> push(Mat value, bool needs, Backward backward) {
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr, needs});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  bool record_grad_ = true;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar>*, int> leaves_;
  std::vector<std::uint8_t> relu_signature_;
  std::size_t visited_ = 0;
};

}  // namespace tiger
