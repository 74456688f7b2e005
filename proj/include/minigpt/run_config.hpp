#pragma once

// `key = value` run configuration files. '#' starts a comment, blank lines
// are ignored, every key may appear once and unknown keys are rejected.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "minigpt/model.hpp"
#include "minigpt/sampler.hpp"
#include "minigpt/trainer.hpp"

namespace minigpt {

struct RunConfig {
  std::string data_path = "data/input.txt";
  std::string out_dir = "out";
  double train_fraction = 0.9;
  /// When set, must equal the vocabulary size of the corpus.
  std::optional<std::size_t> vocab_size;
  ModelConfig model = baseline_model_config();
  TrainConfig train = baseline_train_config();
  SampleConfig sample;
};

/// Throws ConfigError naming `source` and the line for any problem.
RunConfig parse_run_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);

}  // namespace minigpt
