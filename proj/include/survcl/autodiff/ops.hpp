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

#include "survcl/autodiff/tensor.hpp"

#include <span>
#include <vector>

namespace survcl::ad {

// Shape conventions: rank-1 tensors of length n behave as a 1 x n row on the
// left of a product and as an n x 1 column on the right. Binary elementwise
// operations accept equal shapes, a one-element right operand, or a rank-1
// right operand broadcast over the rows of a rank-2 left operand.

Tensor matmul(const Tensor& a, const Tensor& b);
/// y = x W + b applied row-wise.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
/// Throws DomainError on any non-positive entry.
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
/// Clamp with pass-through gradient strictly inside [lo, hi], zero outside.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Column means of an n x m tensor, giving a rank-1 tensor of length m.
Tensor mean_rows(const Tensor& a);

/// Softmax of a rank-1 tensor. Entries equal to -infinity are treated as
/// masked: they receive exactly zero probability and zero gradient.
Tensor softmax(const Tensor& v);
/// Replaces entries with keep[i] == false by -infinity.
Tensor mask_fill(const Tensor& v, const std::vector<bool>& keep);

/// Concatenation of two rank-1 tensors.
Tensor concat(const Tensor& a, const Tensor& b);
/// Column-wise concatenation of two tensors with the same row count.
Tensor concat_cols(const Tensor& a, const Tensor& b);
/// n copies of a rank-1 tensor as the rows of an n x m tensor.
Tensor repeat_rows(const Tensor& v, std::size_t n);
/// Rank-1 tensors of equal length stacked as rows.
Tensor stack_rows(std::span<const Tensor> rows);
/// Elements [begin, end) of a rank-1 tensor.
Tensor slice(const Tensor& v, std::size_t begin, std::size_t end);
/// One element of a rank-1 tensor as a one-element tensor.
Tensor element(const Tensor& v, std::size_t index);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

}  // namespace survcl::ad
