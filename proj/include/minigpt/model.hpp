#pragma once

// Decoder-only GPT: token + position embeddings, pre-LN transformer blocks
// with causal multi-head attention and GELU MLPs, a final LayerNorm and an
// (optionally tied) language-model head.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minigpt/ops.hpp"
#include "minigpt/rng.hpp"
#include "minigpt/tensor.hpp"
#include "minigpt/tokenizer.hpp"

namespace minigpt {

struct ModelConfig {
  std::size_t block_size = 128;
  std::size_t vocab_size = 65;
  std::size_t n_layer = 4;
  std::size_t n_head = 4;
  std::size_t n_embd = 128;
  double dropout = 0.0;
  bool tie_weights = false;

  std::size_t head_dim() const { return n_embd / n_head; }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// T=128, L=4, H=4, d=128, no dropout, untied head.
ModelConfig baseline_model_config(std::size_t vocab_size = 65);
/// T=256, L=6, H=6, d=384, dropout 0.2, tied head.
ModelConfig stronger_model_config(std::size_t vocab_size = 65);

/// Parameter count from the architecture alone.
std::size_t closed_form_param_count(const ModelConfig& cfg);

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct BlockParams {
  Tensor<T> ln1_gain, ln1_bias;
  Tensor<T> q_weight, q_bias, k_weight, k_bias, v_weight, v_bias;
  Tensor<T> attn_proj_weight, attn_proj_bias;
  Tensor<T> ln2_gain, ln2_bias;
  Tensor<T> mlp_fc_weight, mlp_fc_bias;
  Tensor<T> mlp_proj_weight, mlp_proj_bias;
};

template <typename T>
struct GptParams {
  Tensor<T> tok_emb;  // [V, d]
  Tensor<T> pos_emb;  // [T_max, d]
  std::vector<BlockParams<T>> blocks;
  Tensor<T> lnf_gain, lnf_bias;
  Tensor<T> head_weight;  // [V, d]; same storage as tok_emb when tied
  Tensor<T> head_bias;    // [V]

  /// Every trainable tensor once, in the fixed order: tok_emb, pos_emb,
  /// blocks 0..L-1 (ln1, q, k, v, attn proj, ln2, mlp fc, mlp proj; weight
  /// before bias), ln_f, head.bias, and head.weight only when untied.
  std::vector<NamedParam<T>> named() const;
  bool tied() const { return head_weight.same_storage(tok_emb); }
  /// Deep copy that preserves tying.
  GptParams clone() const;
};

/// Weights ~ Normal(0, 0.02), biases 0, LayerNorm gains 1. Draws in
/// enumeration order.
template <typename T>
GptParams<T> init_params(const ModelConfig& cfg, RandomState& rng);

/// Zero-valued parameters of the right shapes (for loading checkpoints).
template <typename T>
GptParams<T> empty_params(const ModelConfig& cfg);

/// Sum of element counts over unique storages.
template <typename T>
std::size_t param_count(const GptParams<T>& params);

template <typename T>
struct ForwardResult {
  Tensor<T> logits;           // [B, T, V]
  std::optional<Tensor<T>> loss;  // scalar, present when targets were given
};

template <typename T>
class Gpt {
 public:
  Gpt(ModelConfig cfg, GptParams<T> params);
  Gpt(const ModelConfig& cfg, RandomState& rng) : Gpt(cfg, init_params<T>(cfg, rng)) {}

  const ModelConfig& config() const noexcept { return cfg_; }
  GptParams<T>& params() noexcept { return params_; }
  const GptParams<T>& params() const noexcept { return params_; }
  std::size_t param_count() const { return minigpt::param_count(params_); }

  /// idx [B, T] with T <= block_size. Dropout runs only when `training`, and
  /// then draws from `rng` in layer order.
  ForwardResult<T> forward(Tape<T>& tape, const IdTensor& idx, const IdTensor* targets, bool training,
                           RandomState* rng) const;

  /// Logits of the final position of a single sequence, dropout off.
  std::vector<T> logits_last(const TokenIds& context) const;

 private:
  ModelConfig cfg_;
  GptParams<T> params_;
};

}  // namespace minigpt
