#pragma once

// Differentiable tensor operations. Each op computes its result eagerly and,
// when the tape is recording and some input requires a gradient, appends the
// matching backward rule to the tape.

#include <cstddef>

#include "minigpt/rng.hpp"
#include "minigpt/tensor.hpp"

namespace minigpt::ops {

/// [..., m, k] x [..., k, n]. Leading dims must match, or one side has none.
template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

/// Elementwise sum; `b` may also be a trailing-suffix row broadcast over `a`
/// (leading size-1 dims of `b` are ignored).
template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

/// Elementwise product of equal shapes.
template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor);

/// Sum of all elements, shape [1].
template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> layer_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5));

template <typename T>
Tensor<T> gelu(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> softmax_lastdim(Tape<T>& tape, const Tensor<T>& x);

/// table [V, d] gathered by ids of any shape -> ids.shape + [d].
template <typename T>
Tensor<T> embedding_lookup(Tape<T>& tape, const Tensor<T>& table, const IdTensor& ids);

/// Mean next-token cross entropy. logits [N, V], targets with N entries.
template <typename T>
Tensor<T> cross_entropy_mean(Tape<T>& tape, const Tensor<T>& logits, const IdTensor& targets);

/// Inverted dropout. Draws one uniform per element, in element order, only
/// when training and p > 0.
template <typename T>
Tensor<T> dropout(Tape<T>& tape, const Tensor<T>& x, double p, bool training, RandomState& rng);

template <typename T>
Tensor<T> transpose_last_two(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& x, Shape shape);

/// [B, T, H*dh] -> [B, H, T, dh]
template <typename T>
Tensor<T> split_heads(Tape<T>& tape, const Tensor<T>& x, std::size_t heads);

/// [B, H, T, dh] -> [B, T, H*dh]
template <typename T>
Tensor<T> merge_heads(Tape<T>& tape, const Tensor<T>& x);

/// Sets scores[..., i, j] = -inf for j > i. Last two dims must be square.
template <typename T>
Tensor<T> masked_fill_causal(Tape<T>& tape, const Tensor<T>& scores);

}  // namespace minigpt::ops
