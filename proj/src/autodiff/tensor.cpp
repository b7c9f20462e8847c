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

#include "survcl/autodiff/tensor.hpp"

#include "survcl/error.hpp"

#include <unordered_set>
#include <utility>

namespace survcl::ad {

namespace detail {

void Node::accumulate(const Matrix& g) { accumulate_expr(g); }

}  // namespace detail

namespace {

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2");
  }
  for (auto s : shape) {
    if (s == 0) throw DimensionError("tensor dimensions must be positive");
  }
}

Shape shape_for(std::size_t rows, std::size_t cols) {
  if (rows == 1) return {cols};
  return {rows, cols};
}

}  // namespace

Tensor Tensor::from_matrix(Matrix values, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->shape = shape_for(static_cast<std::size_t>(values.rows()),
                          static_cast<std::size_t>(values.cols()));
  check_shape(node->shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::vector(std::span<const double> values, bool requires_grad) {
  if (values.empty()) throw DimensionError("empty vector");
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = values[i];
  return from_matrix(std::move(m), requires_grad);
}

Tensor Tensor::vector(std::initializer_list<double> values, bool requires_grad) {
  return vector(std::span<const double>(values.begin(), values.size()), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::span<const double> values,
                      bool requires_grad) {
  if (values.size() != rows * cols) {
    throw DimensionError("matrix payload does not match rows x cols");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = {rows, cols};
  check_shape(node->shape);
  node->value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), node->value.data());
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return from_matrix(std::move(m), requires_grad);
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  check_shape(shape);
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  const auto rows = shape.size() == 1 ? 1 : shape[0];
  const auto cols = shape.back();
  node->value = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::make(Matrix value, Shape shape, std::vector<Tensor> inputs,
                    std::function<void(detail::Node&)> backprop) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  node->shape = std::move(shape);
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backprop = std::move(backprop);
  }
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("undefined tensor");
  return node_->shape;
}

std::size_t Tensor::rows() const { return static_cast<std::size_t>(value().rows()); }
std::size_t Tensor::cols() const { return static_cast<std::size_t>(value().cols()); }
std::size_t Tensor::size() const { return shape_product(shape()); }

const Matrix& Tensor::value() const {
  if (!node_) throw ContractError("undefined tensor");
  return node_->value;
}

Matrix& Tensor::mutable_value() {
  if (!node_) throw ContractError("undefined tensor");
  return node_->value;
}

Matrix Tensor::grad() const {
  if (!node_) throw ContractError("undefined tensor");
  if (node_->grad.size() == 0) return Matrix::Zero(node_->value.rows(), node_->value.cols());
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.resize(0, 0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on a tensor with more than one element");
  return node_->value(0, 0);
}

std::vector<double> Tensor::to_vector() const {
  const auto& v = value();
  return std::vector<double>(v.data(), v.data() + v.size());
}

Tensor Tensor::detach() const {
  auto node = std::make_shared<detail::Node>();
  node->value = value();
  node->shape = shape();
  return Tensor(std::move(node));
}

Tensor Tensor::clone_leaf() const {
  auto t = detach();
  t.node_->requires_grad = requires_grad();
  return t;
}

void ParameterSet::add(std::string name, Tensor tensor, bool trainable) {
  if (!tensor.defined()) throw ContractError("parameter '" + name + "' is undefined");
  entries_.push_back({std::move(name), std::move(tensor), trainable});
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ContractError("no parameter named '" + name + "'");
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward requires a scalar loss");
  }
  detail::Node* root = loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order of the reachable
  // subgraph; leaves never carry a backprop closure.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backprop && node->grad.size() != 0) node->backprop(*node);
  }
  // Release intermediate gradients; leaves keep theirs for the caller.
  for (auto* node : order) {
    if (!node->inputs.empty()) node->grad.resize(0, 0);
  }
}

GradientMap backward(const Tensor& loss, ParameterSet& params) {
  params.zero_grad();
  backward(loss);
  GradientMap out;
  out.reserve(params.size());
  for (const auto& e : params.entries()) out.push_back({e.name, e.tensor.grad()});
  return out;
}

}  // namespace survcl::ad
