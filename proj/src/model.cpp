#include "minigpt/model.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "minigpt/error.hpp"

namespace minigpt {

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("invalid model config: " + msg);
  };
  require(block_size >= 1, "block_size must be >= 1");
  require(vocab_size >= 1, "vocab_size must be >= 1");
  require(n_head >= 1, "n_head must be >= 1");
  require(n_embd >= 1, "n_embd must be >= 1");
  require(n_embd % n_head == 0, "n_embd (" + std::to_string(n_embd) + ") must be divisible by n_head (" +
                                    std::to_string(n_head) + ")");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

ModelConfig baseline_model_config(std::size_t vocab_size) {
  return ModelConfig{128, vocab_size, 4, 4, 128, 0.0, false};
}

ModelConfig stronger_model_config(std::size_t vocab_size) {
  return ModelConfig{256, vocab_size, 6, 6, 384, 0.2, true};
}

std::size_t closed_form_param_count(const ModelConfig& c) {
  const std::size_t d = c.n_embd, v = c.vocab_size;
  const std::size_t attn = 4 * (d * d + d);
  const std::size_t norms = 4 * d;
  const std::size_t fc = 4 * d * d + 4 * d;
  const std::size_t proj = 4 * d * d + d;
  const std::size_t head = c.tie_weights ? v : v * d + v;
  return v * d + c.block_size * d + c.n_layer * (attn + norms + fc + proj) + 2 * d + head;
}

template <typename T>
std::vector<NamedParam<T>> GptParams<T>::named() const {
  std::vector<NamedParam<T>> out;
  out.push_back({"tok_emb", tok_emb});
  out.push_back({"pos_emb", pos_emb});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string p = "blocks." + std::to_string(i) + ".";
    out.push_back({p + "ln1.gain", b.ln1_gain});
    out.push_back({p + "ln1.bias", b.ln1_bias});
    out.push_back({p + "attn.q.weight", b.q_weight});
    out.push_back({p + "attn.q.bias", b.q_bias});
    out.push_back({p + "attn.k.weight", b.k_weight});
    out.push_back({p + "attn.k.bias", b.k_bias});
    out.push_back({p + "attn.v.weight", b.v_weight});
    out.push_back({p + "attn.v.bias", b.v_bias});
    out.push_back({p + "attn.proj.weight", b.attn_proj_weight});
    out.push_back({p + "attn.proj.bias", b.attn_proj_bias});
    out.push_back({p + "ln2.gain", b.ln2_gain});
    out.push_back({p + "ln2.bias", b.ln2_bias});
    out.push_back({p + "mlp.fc.weight", b.mlp_fc_weight});
    out.push_back({p + "mlp.fc.bias", b.mlp_fc_bias});
    out.push_back({p + "mlp.proj.weight", b.mlp_proj_weight});
    out.push_back({p + "mlp.proj.bias", b.mlp_proj_bias});
  }
  out.push_back({"ln_f.gain", lnf_gain});
  out.push_back({"ln_f.bias", lnf_bias});
  out.push_back({"head.bias", head_bias});
  if (!tied()) out.push_back({"head.weight", head_weight});
  return out;
}

template <typename T>
GptParams<T> GptParams<T>::clone() const {
  std::unordered_map<const TensorImpl<T>*, Tensor<T>> copies;
  auto copy = [&](const Tensor<T>& t) {
    auto [it, fresh] = copies.try_emplace(t.impl().get());
    if (fresh) it->second = t.clone();
    return it->second;
  };
  GptParams out;
  out.tok_emb = copy(tok_emb);
  out.pos_emb = copy(pos_emb);
  for (const auto& b : blocks) {
    out.blocks.push_back({copy(b.ln1_gain), copy(b.ln1_bias), copy(b.q_weight), copy(b.q_bias), copy(b.k_weight),
                          copy(b.k_bias), copy(b.v_weight), copy(b.v_bias), copy(b.attn_proj_weight),
                          copy(b.attn_proj_bias), copy(b.ln2_gain), copy(b.ln2_bias), copy(b.mlp_fc_weight),
                          copy(b.mlp_fc_bias), copy(b.mlp_proj_weight), copy(b.mlp_proj_bias)});
  }
  out.lnf_gain = copy(lnf_gain);
  out.lnf_bias = copy(lnf_bias);
  out.head_weight = copy(head_weight);
  out.head_bias = copy(head_bias);
  return out;
}

template <typename T>
GptParams<T> empty_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.n_embd;
  auto zeros = [](Shape s) { return Tensor<T>::zeros(std::move(s), true); };
  auto ones = [](Shape s) { return Tensor<T>::full(std::move(s), T(1), true); };
  GptParams<T> p;
  p.tok_emb = zeros({cfg.vocab_size, d});
  p.pos_emb = zeros({cfg.block_size, d});
  for (std::size_t i = 0; i < cfg.n_layer; ++i) {
    p.blocks.push_back({ones({d}), zeros({d}), zeros({d, d}), zeros({d}), zeros({d, d}), zeros({d}), zeros({d, d}),
                        zeros({d}), zeros({d, d}), zeros({d}), ones({d}), zeros({d}), zeros({d, 4 * d}),
                        zeros({4 * d}), zeros({4 * d, d}), zeros({d})});
  }
  p.lnf_gain = ones({d});
  p.lnf_bias = zeros({d});
  p.head_bias = zeros({cfg.vocab_size});
  p.head_weight = cfg.tie_weights ? p.tok_emb : zeros({cfg.vocab_size, d});
  return p;
}

template <typename T>
GptParams<T> init_params(const ModelConfig& cfg, RandomState& rng) {
  GptParams<T> p = empty_params<T>(cfg);
  for (auto& np : p.named()) {
    if (np.tensor.rank() < 2) continue;
    for (auto& w : np.tensor.data()) w = static_cast<T>(rng.normal(0.0, 0.02));
  }
  return p;
}

template <typename T>
std::size_t param_count(const GptParams<T>& params) {
  std::unordered_set<const TensorImpl<T>*> seen;
  std::size_t total = 0;
  for (const auto& np : params.named())
    if (seen.insert(np.tensor.impl().get()).second) total += np.tensor.numel();
  if (seen.insert(params.head_weight.impl().get()).second) total += params.head_weight.numel();
  return total;
}

template <typename T>
Gpt<T>::Gpt(ModelConfig cfg, GptParams<T> params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  if (params_.blocks.size() != cfg_.n_layer)
    throw ConfigError("parameter set has " + std::to_string(params_.blocks.size()) + " blocks, config wants " +
                      std::to_string(cfg_.n_layer));
  if (params_.tok_emb.shape() != Shape{cfg_.vocab_size, cfg_.n_embd} ||
      params_.pos_emb.shape() != Shape{cfg_.block_size, cfg_.n_embd})
    throw ConfigError("embedding shapes do not match the model config");
}

template <typename T>
ForwardResult<T> Gpt<T>::forward(Tape<T>& tape, const IdTensor& idx, const IdTensor* targets, bool training,
                                 RandomState* rng) const {
  using namespace ops;
  if (idx.shape.size() != 2) throw ShapeError("forward expects idx of shape [B, T], got " + shape_str(idx.shape));
  const std::size_t B = idx.shape[0];
  const std::size_t T_ = idx.shape[1];
  if (T_ > cfg_.block_size)
    throw std::invalid_argument("sequence length " + std::to_string(T_) + " exceeds block_size " +
                                std::to_string(cfg_.block_size));
  const bool drop = training && cfg_.dropout > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("training forward with dropout needs a RandomState");
  RandomState unused(0);
  RandomState& r = rng ? *rng : unused;
  const double p = cfg_.dropout;
  const auto& P = params_;

  auto linear = [&](const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    return add(tape, matmul(tape, x, w), b);
  };

  std::vector<std::int32_t> positions(T_);
  for (std::size_t t = 0; t < T_; ++t) positions[t] = static_cast<std::int32_t>(t);
  const auto pos_ids = IdTensor::from({1, T_}, std::move(positions));

  Tensor<T> x = add(tape, embedding_lookup(tape, P.tok_emb, idx), embedding_lookup(tape, P.pos_emb, pos_ids));
  x = dropout(tape, x, p, drop, r);

  const T att_scale = T(1) / std::sqrt(static_cast<T>(cfg_.head_dim()));
  for (const auto& blk : P.blocks) {
    const Tensor<T> h = layer_norm(tape, x, blk.ln1_gain, blk.ln1_bias);
    const Tensor<T> q = split_heads(tape, linear(h, blk.q_weight, blk.q_bias), cfg_.n_head);
    const Tensor<T> k = split_heads(tape, linear(h, blk.k_weight, blk.k_bias), cfg_.n_head);
    const Tensor<T> v = split_heads(tape, linear(h, blk.v_weight, blk.v_bias), cfg_.n_head);
    Tensor<T> scores = scale(tape, matmul(tape, q, transpose_last_two(tape, k)), att_scale);
    const Tensor<T> att = softmax_lastdim(tape, masked_fill_causal(tape, scores));
    const Tensor<T> heads = merge_heads(tape, matmul(tape, att, v));
    x = add(tape, x, dropout(tape, linear(heads, blk.attn_proj_weight, blk.attn_proj_bias), p, drop, r));

    const Tensor<T> h2 = layer_norm(tape, x, blk.ln2_gain, blk.ln2_bias);
    const Tensor<T> hidden = gelu(tape, linear(h2, blk.mlp_fc_weight, blk.mlp_fc_bias));
    x = add(tape, x, dropout(tape, linear(hidden, blk.mlp_proj_weight, blk.mlp_proj_bias), p, drop, r));
  }
  x = layer_norm(tape, x, P.lnf_gain, P.lnf_bias);
  Tensor<T> logits = add(tape, matmul(tape, x, transpose_last_two(tape, P.head_weight)), P.head_bias);

  ForwardResult<T> result{logits, std::nullopt};
  if (targets != nullptr) {
    if (targets->shape != idx.shape)
      throw ShapeError("targets " + shape_str(targets->shape) + " do not match idx " + shape_str(idx.shape));
    const IdTensor flat = IdTensor::from({B * T_}, targets->data);
    result.loss = cross_entropy_mean(tape, reshape(tape, logits, {B * T_, cfg_.vocab_size}), flat);
  }
  return result;
}

template <typename T>
std::vector<T> Gpt<T>::logits_last(const TokenIds& context) const {
  if (context.empty() || context.size() > cfg_.block_size)
    throw std::invalid_argument("logits_last needs 1..block_size tokens, got " + std::to_string(context.size()));
  auto tape = Tape<T>::inference();
  const auto idx = IdTensor::from({1, context.size()}, context);
  const auto out = forward(tape, idx, nullptr, false, nullptr);
  const std::size_t v = cfg_.vocab_size;
  const auto data = out.logits.data();
  return std::vector<T>(data.end() - static_cast<long>(v), data.end());
}

template struct GptParams<float>;
template struct GptParams<double>;
template class Gpt<float>;
template class Gpt<double>;
template GptParams<float> init_params<float>(const ModelConfig&, RandomState&);
template GptParams<double> init_params<double>(const ModelConfig&, RandomState&);
template GptParams<float> empty_params<float>(const ModelConfig&);
template GptParams<double> empty_params<double>(const ModelConfig&);
template std::size_t param_count<float>(const GptParams<float>&);
template std::size_t param_count<double>(const GptParams<double>&);

}  // namespace minigpt
