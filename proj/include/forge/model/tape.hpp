// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "forge/core/common.hpp"

namespace forge {

template <class S>
class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
template <class S>
class Var {
 public:
  Var() = default;

  const Mat<S>& val() const { return tape_->node(idx_).value; }
  Eigen::Index rows() const { return val().rows(); }
  Eigen::Index cols() const { return val().cols(); }
  S scalar() const {
    require(val().size() == 1, "Var::scalar on non-scalar node");
    return val()(0, 0);
  }
  bool valid() const { return tape_ != nullptr; }
  Tape<S>* tape() const { return tape_; }
  std::size_t index() const { return idx_; }

 private:
  friend class Tape<S>;
  Var(Tape<S>* tape, std::size_t idx) : tape_(tape), idx_(idx) {}
  Tape<S>* tape_ = nullptr;
  std::size_t idx_ = 0;
};

/// Reverse-mode autodiff tape over dense Eigen matrices. Nodes are created
/// in topological order by construction; backward() walks them in reverse.
/// Gradients are allocated lazily so untouched branches cost nothing.
template <class S>
class Tape {
 public:
  struct Node {
    Mat<S> value;
    Mat<S> grad;  // empty until touched
    std::function<void(Tape&)> backward;  // may be empty (constants, leaves)
    bool needs_grad = false;
  };

  /// Constant input; gradients never flow into it.
  Var<S> constant(Mat<S> value) {
    nodes_.push_back(Node{std::move(value), {}, {}, false});
    return Var<S>(this, nodes_.size() - 1);
  }

  /// Leaf that wants gradients (parameters enter the graph through these;
  /// the binding to external storage is added by the caller as `backward`).
  Var<S> leaf(Mat<S> value, std::function<void(Tape&)> backward) {
    nodes_.push_back(Node{std::move(value), {}, std::move(backward), true});
    return Var<S>(this, nodes_.size() - 1);
  }

  /// Interior op node.
  Var<S> make(Mat<S> value, bool needs_grad, std::function<void(Tape&)> backward) {
    nodes_.push_back(Node{std::move(value), {},
                          needs_grad ? std::move(backward) : std::function<void(Tape&)>{},
                          needs_grad});
    return Var<S>(this, nodes_.size() - 1);
  }

  Node& node(std::size_t idx) { return nodes_[idx]; }
  const Node& node(std::size_t idx) const { return nodes_[idx]; }
  std::size_t size() const { return nodes_.size(); }

  bool has_grad(const Var<S>& v) const { return nodes_[v.index()].grad.size() > 0; }

  /// Gradient accumulator; allocates zeros on first touch.
  Mat<S>& grad(const Var<S>& v) {
    Node& n = nodes_[v.index()];
    if (n.grad.size() == 0) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  /// Seeds d(loss)/d(loss) = 1 and propagates to all reachable leaves.
  void backward(const Var<S>& loss) {
    require(loss.tape() == this, "backward: loss from another tape");
    require(loss.val().size() == 1, "backward: loss must be scalar");
    grad(loss)(0, 0) = S(1);
    for (std::size_t i = loss.index() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.size() == 0 || !n.backward) continue;
      n.backward(*this);
    }
  }

  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

}  // namespace forge
