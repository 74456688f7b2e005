#include <doctest.h>

#include <filesystem>

#include "minigpt/error.hpp"
#include "minigpt/run_config.hpp"
#include "test_paths.hpp"

using namespace minigpt;

namespace {

RunConfig preset(const char* name) {
  return load_run_config((std::filesystem::path(test_paths::source_dir()) / "configs" / name).string());
}

std::string error_of(std::string_view text) {
  try {
    parse_run_config(text, "x.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("baseline preset matches the published settings") {
  const auto c = preset("baseline.cfg");
  CHECK(c.model == baseline_model_config());
  CHECK(c.train.batch_size == 32);
  CHECK(c.train.max_iters == 3000);
  CHECK(c.train.lr.kind == LrPolicy::Kind::Fixed);
  CHECK(c.train.lr.fixed_lr == 3e-4);
  CHECK(c.train.beta1 == 0.9);
  CHECK(c.train.beta2 == 0.999);
  CHECK(c.train.weight_decay == 0.01);
  CHECK(c.train.decay_mode == WeightDecayMode::Uniform);
  CHECK_FALSE(c.train.clip_norm.has_value());
  CHECK(c.train.policy == CheckpointPolicy::Final);
  CHECK(c.train.seed == 42);
  CHECK(c.train.eval_interval == 250);
  CHECK(c.train.eval_iters == 20);
  CHECK(c.sample.max_new_tokens == 800);
  CHECK(c.sample.temperature == 0.8);
  CHECK(c.sample.top_k == std::optional<std::size_t>{200});
}

TEST_CASE("stronger preset matches the published settings") {
  const auto c = preset("stronger.cfg");
  CHECK(c.model == stronger_model_config());
  CHECK(c.train.batch_size == 64);
  CHECK(c.train.max_iters == 5000);
  CHECK(c.train.lr.kind == LrPolicy::Kind::WarmupCosine);
  CHECK(c.train.lr.schedule.max_lr == 1e-3);
  CHECK(c.train.lr.schedule.min_lr == 1e-4);
  CHECK(c.train.lr.schedule.warmup_steps == 100);
  CHECK(c.train.lr.schedule.decay_steps == 5000);
  CHECK(c.train.beta1 == 0.9);
  CHECK(c.train.beta2 == 0.99);
  CHECK(c.train.weight_decay == 0.1);
  CHECK(c.train.decay_mode == WeightDecayMode::Grouped);
  CHECK(c.train.clip_norm == std::optional<double>{1.0});
  CHECK(c.train.policy == CheckpointPolicy::BestVal);
  CHECK(c.train.seed == 42);
}

TEST_CASE("parsing details") {
  const auto c = parse_run_config(
      "# comment\n\n  n_layer = 2   # trailing\nn_head=2\nn_embd = 16\ntop_k = none\nclip_norm = 0.5\n"
      "vocab_size = 11\ntrain_fraction = 0.8\n");
  CHECK(c.model.n_layer == 2);
  CHECK(c.model.n_embd == 16);
  CHECK_FALSE(c.sample.top_k.has_value());
  CHECK(c.train.clip_norm == std::optional<double>{0.5});
  CHECK(c.vocab_size == std::optional<std::size_t>{11});
  CHECK(c.train_fraction == 0.8);
}

TEST_CASE("bad input names the line") {
  const auto unknown = error_of("n_layer = 2\nblocksize = 64\n");
  CHECK(unknown.find("x.cfg:2") != std::string::npos);
  CHECK(unknown.find("blocksize") != std::string::npos);

  CHECK(error_of("n_layer = 2\nn_layer = 3\n").find("x.cfg:2") != std::string::npos);
  CHECK(error_of("n_layer =\n").find("x.cfg:1") != std::string::npos);
  CHECK(error_of("n_layer 3\n").find("x.cfg:1") != std::string::npos);
  CHECK(error_of("n_layer = three\n").find("x.cfg:1") != std::string::npos);
  CHECK(error_of("tie_weights = maybe\n") != "");
  CHECK(error_of("lr_schedule = linear\n") != "");
  CHECK(error_of("n_embd = 10\nn_head = 4\n") != "");
  CHECK(error_of("temperature = 0\n") != "");
  CHECK(error_of("train_fraction = 1.0\n") != "");
  CHECK_THROWS_AS(load_run_config("/nonexistent.cfg"), IoError);
}
