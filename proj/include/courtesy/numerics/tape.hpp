#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "courtesy/numerics/tensor.hpp"

namespace courtesy::numerics {

template <typename Scalar>
class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape it came from is alive and not cleared.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, int id) : tape_(tape), id_(id) {}

  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }
  bool needs_grad() const { return tape_->needs_grad(id_); }

  Tape<Scalar>* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<Scalar>* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode gradient tape. Nodes are appended in evaluation order, which is
// a topological order, so backward is a single reverse sweep.
//
// A tape built with recording=false only stores forward values; it is what
// inference paths use.
template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const Mat& out_grad)>;

  explicit Tape(bool recording = true) : recording_(recording) {}

  // After this call, leaf() binds tensors as constants; only input() tensors
  // receive gradients. Used to differentiate with respect to inputs while the
  // model stays read-only.
  void freeze_leaves() { frozen_ = true; }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  // Leaf bound to a Tensor. Repeated calls for the same Tensor return the same
  // node so its gradient is accumulated once. Only a recording tape writes to
  // the tensor (its grad, during backward); a non-recording tape treats it as
  // read-only, so shared model snapshots can be evaluated concurrently.
  Var<Scalar> leaf(const Tensor<Scalar>& tensor) {
    if (auto it = leaf_ids_.find(&tensor); it != leaf_ids_.end()) return {this, it->second};
    check_finite(tensor.value, "leaf");
    const bool track = recording_ && !frozen_ && tensor.requires_grad;
    Node node;
    node.external = &tensor.value;
    node.needs_grad = track;
    node.leaf = track ? const_cast<Tensor<Scalar>*>(&tensor) : nullptr;
    nodes_.push_back(std::move(node));
    const int id = static_cast<int>(nodes_.size()) - 1;
    leaf_ids_.emplace(&tensor, id);
    return {this, id};
  }

  // Leaf that always receives a gradient on a recording tape.
  Var<Scalar> input(Tensor<Scalar>& tensor) {
    check_finite(tensor.value, "input");
    Node node;
    node.external = &tensor.value;
    node.needs_grad = recording_;
    node.leaf = recording_ ? &tensor : nullptr;
    nodes_.push_back(std::move(node));
    const int id = static_cast<int>(nodes_.size()) - 1;
    leaf_ids_.emplace(&tensor, id);
    return {this, id};
  }

  Var<Scalar> constant(Mat value) {
    check_finite(value, "constant");
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  // Appends an op result. `fn` receives the output gradient and pushes
  // contributions to the parents through accumulate().
  Var<Scalar> record(Mat value, bool any_parent_needs_grad, Backward fn, const char* op) {
    check_finite(value, op);
    const bool track = recording_ && any_parent_needs_grad;
    Node node;
    node.value = std::move(value);
    node.needs_grad = track;
    if (track) node.fn = std::move(fn);
    nodes_.push_back(std::move(node));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  const Mat& value(int id) const {
    const Node& node = nodes_[id];
    return node.external != nullptr ? *node.external : node.value;
  }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& node = nodes_[id];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  // Mutable gradient slot for scatter-style backward rules (embedding lookup).
  Mat* grad_slot(int id) {
    Node& node = nodes_[id];
    if (!node.needs_grad) return nullptr;
    if (node.grad.size() == 0) node.grad.setZero(value(id).rows(), value(id).cols());
    return &node.grad;
  }

  // Seeds d(loss)/d(loss) = 1, sweeps the tape in reverse, adds leaf
  // gradients into their Tensors and clears the tape.
  void backward(const Var<Scalar>& loss) {
    if (loss.tape() != this) throw UsageError("backward: loss belongs to another tape");
    if (loss.rows() != 1 || loss.cols() != 1) {
      throw UsageError("backward: loss must be a scalar, got " + std::to_string(loss.rows()) + "x" +
                       std::to_string(loss.cols()));
    }
    if (nodes_[loss.id()].needs_grad) {
      nodes_[loss.id()].grad = Mat::Ones(1, 1);
      for (int i = loss.id(); i >= 0; --i) {
        Node& node = nodes_[i];
        if (!node.needs_grad || node.grad.size() == 0) continue;
        if (node.fn) {
          // The closure may touch other nodes; hold the gradient by value.
          const Mat g = std::move(node.grad);
          node.fn(*this, g);
        } else if (node.leaf != nullptr) {
          if (!node.leaf->has_grad()) node.leaf->zero_grad();
          node.leaf->grad += node.grad;
        }
      }
    }
    clear();
  }

  void clear() {
    nodes_.clear();
    leaf_ids_.clear();
  }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;  // leaves alias their Tensor's value
    Mat grad;
    bool needs_grad = false;
    Tensor<Scalar>* leaf = nullptr;
    Backward fn;
  };

  static void check_finite(const Mat& m, const char* op) {
    if (!m.allFinite()) throw NumericError(std::string(op) + ": non-finite value");
  }

  bool recording_;
  bool frozen_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor<Scalar>*, int> leaf_ids_;
};

}  // namespace courtesy::numerics
