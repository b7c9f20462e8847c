// Copyright 2026 The survcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace survcl::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::size_t>;

namespace detail {

// One vertex of the dynamic tape. Rank-1 values are stored as 1 x n rows.
struct Node {
  Matrix value;
  Matrix grad;  // empty until the first accumulation
  Shape shape;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backprop;

  void accumulate(const Matrix& g);
  template <typename Expr>
  void accumulate_expr(const Expr& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

}  // namespace detail

/// Handle to a tensor on the tape. Copies share the underlying node, so a
/// parameter tensor held by a layer and the one seen by an operation are
/// the same vertex.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from_matrix(Matrix values, bool requires_grad = false);
  static Tensor vector(std::span<const double> values, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::span<const double> values,
                       bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor zeros(const Shape& shape, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const;

  const Matrix& value() const;
  /// Direct write access; only meaningful for leaves (parameters).
  Matrix& mutable_value();
  /// Gradient accumulated by the last backward pass; zeros if none reached
  /// this tensor.
  Matrix grad() const;
  void zero_grad();
  bool requires_grad() const;

  /// Single value of a one-element tensor.
  double item() const;
  /// Flat copy of the values in row-major order.
  std::vector<double> to_vector() const;

  /// New leaf holding a copy of the values, detached from any graph.
  Tensor detach() const;
  /// Deep copy as a fresh leaf that keeps requires_grad.
  Tensor clone_leaf() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  static Tensor make(Matrix value, Shape shape, std::vector<Tensor> inputs,
                     std::function<void(detail::Node&)> backprop);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Named trainable tensors of one model (the parameter vector theta).
/// Frozen entries keep their values under optimisation.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    bool trainable = true;
  };

  void add(std::string name, Tensor tensor, bool trainable = true);
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  const Tensor& at(const std::string& name) const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

struct GradientEntry {
  std::string name;
  Matrix grad;
};
using GradientMap = std::vector<GradientEntry>;

/// Reverse sweep from a scalar loss; gradients accumulate into every
/// reachable tensor that requires them.
void backward(const Tensor& loss);

/// Clears the parameter gradients, runs the reverse sweep and returns one
/// gradient per parameter (zeros for parameters the loss does not reach).
GradientMap backward(const Tensor& loss, ParameterSet& params);

}  // namespace survcl::ad
