#pragma once

// Small shared setups: the memorization task and a toy character model.

#include <string>

#include "minigpt/dataset.hpp"
#include "minigpt/model.hpp"
#include "minigpt/trainer.hpp"

namespace fixtures {

using namespace minigpt;

/// 32 distinct tokens repeated; train and val hold the same cycle.
inline TokenStore memorization_store(std::size_t block_size = 4) {
  TokenIds ids;
  for (int rep = 0; rep < 40; ++rep)
    for (std::int32_t t = 0; t < 32; ++t) ids.push_back(t);
  return split_tokens(ids, 0.75, block_size);
}

/// The gradient-check architecture (L=1, H=2, d=8, T=4) over 32 tokens.
inline ModelConfig memorization_model() { return ModelConfig{4, 32, 1, 2, 8, 0.0, false}; }

inline TrainConfig memorization_train(std::size_t steps = 500) {
  TrainConfig c;
  c.batch_size = 16;
  c.max_iters = steps;
  c.eval_interval = steps;
  c.eval_iters = 4;
  c.lr.fixed_lr = 1e-2;
  c.weight_decay = 0.0;
  c.seed = 42;
  return c;
}

/// A short pangram-ish text with a handful of characters, enough for sampling tests.
inline std::string toy_text() {
  std::string s;
  for (int i = 0; i < 20; ++i) s += "ROMEO: the quick brown fox.\nJULIET: jumps over the lazy dog!\n";
  return s;
}

}  // namespace fixtures
