#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minigpt/model.hpp"
#include "minigpt/rng.hpp"
#include "minigpt/tokenizer.hpp"

namespace minigpt {

struct SampleConfig {
  std::size_t max_new_tokens = 800;
  double temperature = 0.8;
  std::optional<std::size_t> top_k = 200;
  std::uint64_t seed = 42;

  void validate() const;
};

std::vector<float> apply_temperature(std::span<const float> logits, double temperature);

/// Entries strictly below the k-th largest logit become -inf; entries tied
/// with it are kept. k >= size returns the input unchanged.
std::vector<float> apply_top_k(std::span<const float> logits, std::size_t k);

/// Softmax in double precision.
std::vector<double> softmax(std::span<const float> logits);

/// Inverse-CDF draw over `probs` in index order with one uniform.
std::size_t sample_categorical(std::span<const double> probs, RandomState& rng);

/// Appends max_new_tokens sampled ids to `context`, cropping the model input
/// to the last block_size ids each step. Returns only the new ids.
TokenIds generate_ids(const Gpt<float>& model, TokenIds context, const SampleConfig& cfg, RandomState& rng);

/// prompt + decoded continuation. An empty prompt is seeded with '\n' (which
/// then is not part of the returned text).
std::string generate(const Gpt<float>& model, const Vocabulary& vocab, std::string_view prompt,
                     const SampleConfig& cfg);

}  // namespace minigpt
