#include "minigpt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace minigpt {

void SampleConfig::validate() const {
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
  if (top_k && *top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

std::vector<float> apply_temperature(std::span<const float> logits, double temperature) {
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be positive");
  std::vector<float> out(logits.begin(), logits.end());
  if (temperature == 1.0) return out;
  for (auto& v : out) v = static_cast<float>(v / temperature);
  return out;
}

std::vector<float> apply_top_k(std::span<const float> logits, std::size_t k) {
  if (k < 1) throw std::invalid_argument("top_k must be >= 1");
  std::vector<float> out(logits.begin(), logits.end());
  if (k >= out.size()) return out;
  std::vector<float> sorted = out;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k - 1), sorted.end(), std::greater<>());
  const float kth = sorted[k - 1];
  for (auto& v : out)
    if (v < kth) v = -std::numeric_limits<float>::infinity();
  return out;
}

std::vector<double> softmax(std::span<const float> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += p[i] = std::exp(static_cast<double>(logits[i]) - mx);
  for (auto& v : p) v /= total;
  return p;
}

std::size_t sample_categorical(std::span<const double> probs, RandomState& rng) {
  const double u = rng.uniform();
  double cdf = 0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    cdf += probs[i];
    last_nonzero = i;
    if (u < cdf) return i;
  }
  return last_nonzero;  // rounding left cdf slightly below 1
}

TokenIds generate_ids(const Gpt<float>& model, TokenIds context, const SampleConfig& cfg, RandomState& rng) {
  cfg.validate();
  if (context.empty()) throw std::invalid_argument("generation needs at least one context token");
  const std::size_t block = model.config().block_size;
  TokenIds produced;
  produced.reserve(cfg.max_new_tokens);
  for (std::size_t i = 0; i < cfg.max_new_tokens; ++i) {
    const std::size_t from = context.size() > block ? context.size() - block : 0;
    const TokenIds window(context.begin() + static_cast<long>(from), context.end());
    std::vector<float> logits = apply_temperature(model.logits_last(window), cfg.temperature);
    if (cfg.top_k) logits = apply_top_k(logits, *cfg.top_k);
    const auto next = static_cast<TokenId>(sample_categorical(softmax(logits), rng));
    context.push_back(next);
    produced.push_back(next);
  }
  return produced;
}

std::string generate(const Gpt<float>& model, const Vocabulary& vocab, std::string_view prompt,
                     const SampleConfig& cfg) {
  TokenIds context = vocab.encode(prompt);
  if (context.empty()) context.push_back(vocab.id_of(U'\n'));
  RandomState rng(cfg.seed);
  return std::string(prompt) + vocab.decode(generate_ids(model, std::move(context), cfg, rng));
}

}  // namespace minigpt
