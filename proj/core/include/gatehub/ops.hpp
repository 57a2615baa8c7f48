#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

// Differentiable tensor operations. Each op computes its forward value
// eagerly and, when a tape is active and any input requires grad, records a
// backward rule. Row-wise ops treat every tensor as rows() x cols(), i.e. all
// leading extents are flattened.

// [..., k] x [k, n] -> [..., n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Rank-2 transpose.
Tensor transpose(const Tensor& x);

// a + b. `b` must have the same shape as `a`, or be a row vector ([n] or
// [1, n]) broadcast over the rows of `a`, or hold a single element.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise product; same broadcasting rules as add().
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor sigmoid(const Tensor& x);
// Natural log. Throws DomainError if any input is <= 0.
Tensor log(const Tensor& x);
// log(sigmoid(x)), evaluated without underflow for very negative x.
Tensor log_sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
// Tanh-approximated GELU; the feed-forward activation.
Tensor gelu(const Tensor& x);
// max(x, floor); gradient is zero where the floor is active.
Tensor clamp_min(const Tensor& x, double floor);

// Row-wise numerically stable softmax.
//
// `bias` is added to the logits before normalization and must be shaped
// like `x`, or be a row vector [c] / [1, c] (shared by every row), or a
// column [r, 1] (shared along each row). `mask`, when given, has rows()*cols()
// entries; nonzero marks a forbidden entry whose probability is exactly 0.
// A row with every entry forbidden raises ContractError.
Tensor softmax_rows(const Tensor& x, const Tensor& bias = {},
                    std::span<const std::uint8_t> mask = {});

// Row-wise layer normalization with optional affine parameters of shape [c].
inline constexpr double kLayerNormEps = 1e-5;
Tensor layer_norm(const Tensor& x, const Tensor& gamma = {}, const Tensor& beta = {},
                  double eps = kLayerNormEps);

// Concatenate rank-2 (or rank-1) tensors along the last axis; row counts must match.
Tensor concat_lastdim(std::span<const Tensor> parts);
// Columns [start, start + count) of every row.
Tensor slice_lastdim(const Tensor& x, std::size_t start, std::size_t count);
// Rows [start, start + count) of a rank-2 tensor.
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
// Stack rank-2 tensors with equal column counts along the row axis.
Tensor concat_rows(std::span<const Tensor> parts);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace gatehub
