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

#include "survcl/autodiff/ops.hpp"

#include "survcl/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace survcl::ad {

namespace {

using detail::Node;

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

Shape shape_of(Eigen::Index rows, Eigen::Index cols, bool rank1) {
  if (rank1) return {static_cast<std::size_t>(cols)};
  return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

// How an operand of a binary elementwise op expands to the output grid.
enum class Expand { kNone, kScalar, kRow };

struct Broadcast {
  Expand a = Expand::kNone;
  Expand b = Expand::kNone;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Shape shape;
};

Broadcast broadcast(const Tensor& a, const Tensor& b, const char* op) {
  Broadcast bc;
  if (a.shape() == b.shape()) {
    bc.rows = a.value().rows();
    bc.cols = a.value().cols();
    bc.shape = a.shape();
    return bc;
  }
  if (b.size() == 1) {
    bc.b = Expand::kScalar;
    bc.rows = a.value().rows();
    bc.cols = a.value().cols();
    bc.shape = a.shape();
    return bc;
  }
  if (a.size() == 1) {
    bc.a = Expand::kScalar;
    bc.rows = b.value().rows();
    bc.cols = b.value().cols();
    bc.shape = b.shape();
    return bc;
  }
  if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.cols()) {
    bc.b = Expand::kRow;
    bc.rows = a.value().rows();
    bc.cols = a.value().cols();
    bc.shape = a.shape();
    return bc;
  }
  if (b.rank() == 2 && a.rank() == 1 && a.cols() == b.cols()) {
    bc.a = Expand::kRow;
    bc.rows = b.value().rows();
    bc.cols = b.value().cols();
    bc.shape = b.shape();
    return bc;
  }
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()));
}

Matrix expand(const Matrix& v, Expand mode, Eigen::Index rows, Eigen::Index cols) {
  switch (mode) {
    case Expand::kScalar:
      return Matrix::Constant(rows, cols, v(0, 0));
    case Expand::kRow:
      return v.replicate(rows, 1);
    case Expand::kNone:
      break;
  }
  return v;
}

// Sums an output-grid gradient back to the operand's own shape.
Matrix reduce(const Matrix& g, Expand mode) {
  switch (mode) {
    case Expand::kScalar:
      return Matrix::Constant(1, 1, g.sum());
    case Expand::kRow:
      return g.colwise().sum();
    case Expand::kNone:
      break;
  }
  return g;
}

template <typename Forward, typename GradA, typename GradB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Forward fwd, GradA ga, GradB gb) {
  const Broadcast bc = broadcast(a, b, op);
  Matrix av = expand(a.value(), bc.a, bc.rows, bc.cols);
  Matrix bv = expand(b.value(), bc.b, bc.rows, bc.cols);
  Matrix out = fwd(av, bv);
  return Tensor::make(std::move(out), bc.shape, {a, b},
                      [bc, ga, gb](Node& self) {
                        Node& na = *self.inputs[0];
                        Node& nb = *self.inputs[1];
                        const Matrix av = expand(na.value, bc.a, bc.rows, bc.cols);
                        const Matrix bv = expand(nb.value, bc.b, bc.rows, bc.cols);
                        if (na.requires_grad) na.accumulate(reduce(ga(self.grad, av, bv), bc.a));
                        if (nb.requires_grad) nb.accumulate(reduce(gb(self.grad, av, bv), bc.b));
                      });
}

// Elementwise unary op whose derivative is expressed through input x and
// output y.
template <typename Forward, typename Deriv>
Tensor unary(const Tensor& a, Forward fwd, Deriv deriv) {
  Matrix out = a.value().unaryExpr(fwd);
  return Tensor::make(std::move(out), a.shape(), {a}, [deriv](Node& self) {
    Node& in = *self.inputs[0];
    Matrix g(self.value.rows(), self.value.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      g.data()[i] = self.grad.data()[i] * deriv(in.value.data()[i], self.value.data()[i]);
    }
    in.accumulate(g);
  });
}

void require_rank1(const Tensor& v, const char* op) {
  if (v.rank() != 1) {
    throw DimensionError(std::string(op) + " expects a rank-1 tensor, got " +
                         shape_str(v.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const bool a_row = a.rank() == 1;
  const bool b_col = b.rank() == 1;
  const Eigen::Index inner_a = a.value().cols();
  const Eigen::Index inner_b = b_col ? b.value().cols() : b.value().rows();
  if (inner_a != inner_b) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  Matrix out;
  if (b_col) {
    out = (a.value() * b.value().transpose()).transpose();
  } else {
    out = a.value() * b.value();
  }
  Shape shape;
  if (a_row && b_col) {
    shape = {1};
  } else if (a_row) {
    shape = {static_cast<std::size_t>(out.cols())};
  } else if (b_col) {
    shape = {static_cast<std::size_t>(out.cols())};
  } else {
    shape = {static_cast<std::size_t>(out.rows()), static_cast<std::size_t>(out.cols())};
  }
  return Tensor::make(std::move(out), std::move(shape), {a, b}, [b_col](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    if (b_col) {
      // self.value = (A b^T)^T; G has the same 1 x n layout.
      if (na.requires_grad) na.accumulate_expr(self.grad.transpose() * nb.value);
      if (nb.requires_grad) nb.accumulate_expr(self.grad * na.value);
    } else {
      if (na.requires_grad) na.accumulate_expr(self.grad * nb.value.transpose());
      if (nb.requires_grad) nb.accumulate_expr(na.value.transpose() * self.grad);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2) throw DimensionError("linear: weight must be rank 2");
  if (bias.rank() != 1 || bias.cols() != weight.cols()) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                         shape_str(weight.shape()));
  }
  if (x.cols() != weight.rows()) {
    throw DimensionError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                         shape_str(weight.shape()));
  }
  Matrix out = x.value() * weight.value();
  out.rowwise() += bias.value().row(0);
  Shape shape = shape_of(out.rows(), out.cols(), x.rank() == 1);
  return Tensor::make(std::move(out), std::move(shape), {x, weight, bias}, [](Node& self) {
    Node& nx = *self.inputs[0];
    Node& nw = *self.inputs[1];
    Node& nb = *self.inputs[2];
    if (nx.requires_grad) nx.accumulate_expr(self.grad * nw.value.transpose());
    if (nw.requires_grad) nw.accumulate_expr(nx.value.transpose() * self.grad);
    if (nb.requires_grad) nb.accumulate_expr(self.grad.colwise().sum());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](const Matrix& x, const Matrix& y) -> Matrix { return x + y; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](const Matrix& x, const Matrix& y) -> Matrix { return x - y; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul",
      [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseProduct(y); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix { return g.cwiseProduct(y); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix { return g.cwiseProduct(x); });
}

Tensor scale(const Tensor& a, double factor) {
  Matrix out = a.value() * factor;
  return Tensor::make(std::move(out), a.shape(), {a}, [factor](Node& self) {
    self.inputs[0]->accumulate_expr(self.grad * factor);
  });
}

Tensor add_scalar(const Tensor& a, double offset) {
  Matrix out = a.value().array() + offset;
  return Tensor::make(std::move(out), a.shape(), {a},
                      [](Node& self) { self.inputs[0]->accumulate(self.grad); });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  const auto& v = a.value();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v.data()[i] > 0.0)) {
      throw DomainError("log of non-positive value " + std::to_string(v.data()[i]));
    }
  }
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp: lo must not exceed hi");
  return unary(
      a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  return Tensor::make(std::move(out), {1}, {a}, [](Node& self) {
    Node& in = *self.inputs[0];
    in.accumulate(Matrix::Constant(in.value.rows(), in.value.cols(), self.grad(0, 0)));
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.size());
  Matrix out = Matrix::Constant(1, 1, a.value().sum() / n);
  return Tensor::make(std::move(out), {1}, {a}, [n](Node& self) {
    Node& in = *self.inputs[0];
    in.accumulate(Matrix::Constant(in.value.rows(), in.value.cols(), self.grad(0, 0) / n));
  });
}

Tensor mean_rows(const Tensor& a) {
  const double n = static_cast<double>(a.value().rows());
  Matrix out = a.value().colwise().sum() / n;
  Shape shape = {static_cast<std::size_t>(out.cols())};
  return Tensor::make(std::move(out), std::move(shape), {a}, [n](Node& self) {
    Node& in = *self.inputs[0];
    in.accumulate_expr((self.grad / n).replicate(in.value.rows(), 1));
  });
}

Tensor softmax(const Tensor& v) {
  require_rank1(v, "softmax");
  const auto& x = v.value();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double max = neg_inf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(0, i) != neg_inf && x(0, i) > max) max = x(0, i);
  }
  if (max == neg_inf) throw ContractError("softmax: every entry is masked (empty support)");
  Matrix out(1, x.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out(0, i) = x(0, i) == neg_inf ? 0.0 : std::exp(x(0, i) - max);
    total += out(0, i);
  }
  out /= total;
  return Tensor::make(std::move(out), v.shape(), {v}, [](Node& self) {
    // dx_i = y_i (g_i - sum_j g_j y_j); masked entries have y_i = 0.
    const Matrix& y = self.value;
    const double dot = self.grad.cwiseProduct(y).sum();
    self.inputs[0]->accumulate_expr(y.cwiseProduct((self.grad.array() - dot).matrix()));
  });
}

Tensor mask_fill(const Tensor& v, const std::vector<bool>& keep) {
  require_rank1(v, "mask_fill");
  if (keep.size() != v.size()) throw DimensionError("mask_fill: mask length differs");
  Matrix out = v.value();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) out(0, static_cast<Eigen::Index>(i)) = -std::numeric_limits<double>::infinity();
  }
  return Tensor::make(std::move(out), v.shape(), {v}, [keep](Node& self) {
    Matrix g = self.grad;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (!keep[i]) g(0, static_cast<Eigen::Index>(i)) = 0.0;
    }
    self.inputs[0]->accumulate(g);
  });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_rank1(a, "concat");
  require_rank1(b, "concat");
  const Eigen::Index na = a.value().cols();
  const Eigen::Index nb = b.value().cols();
  Matrix out(1, na + nb);
  out << a.value(), b.value();
  return Tensor::make(std::move(out), {static_cast<std::size_t>(na + nb)}, {a, b},
                      [na, nb](Node& self) {
                        Node& ia = *self.inputs[0];
                        Node& ib = *self.inputs[1];
                        if (ia.requires_grad) ia.accumulate_expr(self.grad.leftCols(na));
                        if (ib.requires_grad) ib.accumulate_expr(self.grad.rightCols(nb));
                      });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.value().rows() != b.value().rows()) {
    throw DimensionError("concat_cols: row counts differ, " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const Eigen::Index ca = a.value().cols();
  const Eigen::Index cb = b.value().cols();
  Matrix out(a.value().rows(), ca + cb);
  out << a.value(), b.value();
  Shape shape = shape_of(out.rows(), out.cols(), a.rank() == 1 && b.rank() == 1);
  return Tensor::make(std::move(out), std::move(shape), {a, b}, [ca, cb](Node& self) {
    Node& ia = *self.inputs[0];
    Node& ib = *self.inputs[1];
    if (ia.requires_grad) ia.accumulate_expr(self.grad.leftCols(ca));
    if (ib.requires_grad) ib.accumulate_expr(self.grad.rightCols(cb));
  });
}

Tensor repeat_rows(const Tensor& v, std::size_t n) {
  require_rank1(v, "repeat_rows");
  if (n == 0) throw DimensionError("repeat_rows: zero rows");
  Matrix out = v.value().replicate(static_cast<Eigen::Index>(n), 1);
  Shape shape = {n, v.size()};
  return Tensor::make(std::move(out), std::move(shape), {v}, [](Node& self) {
    self.inputs[0]->accumulate_expr(self.grad.colwise().sum());
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const Eigen::Index width = rows.front().value().cols();
  Matrix out(static_cast<Eigen::Index>(rows.size()), width);
  std::vector<Tensor> inputs;
  inputs.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_rank1(rows[i], "stack_rows");
    if (rows[i].value().cols() != width) throw DimensionError("stack_rows: ragged rows");
    out.row(static_cast<Eigen::Index>(i)) = rows[i].value().row(0);
    inputs.push_back(rows[i]);
  }
  Shape shape = {rows.size(), static_cast<std::size_t>(width)};
  return Tensor::make(std::move(out), std::move(shape), std::move(inputs), [](Node& self) {
    for (std::size_t i = 0; i < self.inputs.size(); ++i) {
      Node& in = *self.inputs[i];
      if (in.requires_grad) in.accumulate_expr(self.grad.row(static_cast<Eigen::Index>(i)));
    }
  });
}

Tensor slice(const Tensor& v, std::size_t begin, std::size_t end) {
  require_rank1(v, "slice");
  if (begin >= end || end > v.size()) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of bounds for length " + std::to_string(v.size()));
  }
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  Matrix out = v.value().middleCols(b, len);
  return Tensor::make(std::move(out), {end - begin}, {v}, [b, len](Node& self) {
    Node& in = *self.inputs[0];
    Matrix g = Matrix::Zero(1, in.value.cols());
    g.middleCols(b, len) = self.grad;
    in.accumulate(g);
  });
}

Tensor element(const Tensor& v, std::size_t index) { return slice(v, index, index + 1); }

}  // namespace survcl::ad
