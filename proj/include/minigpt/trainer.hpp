#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "minigpt/dataset.hpp"
#include "minigpt/model.hpp"
#include "minigpt/optim.hpp"

namespace minigpt {

enum class CheckpointPolicy { Final, BestVal };
enum class WeightDecayMode { Uniform, Grouped };

struct LrPolicy {
  enum class Kind { Fixed, WarmupCosine };
  Kind kind = Kind::Fixed;
  double fixed_lr = 3e-4;
  ScheduleConfig schedule;

  double at(std::size_t step) const { return kind == Kind::Fixed ? fixed_lr : lr_at(step, schedule); }
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_iters = 3000;
  std::size_t eval_interval = 250;
  std::size_t eval_iters = 20;
  LrPolicy lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  WeightDecayMode decay_mode = WeightDecayMode::Uniform;
  std::optional<double> clip_norm;
  std::uint64_t seed = 42;
  CheckpointPolicy policy = CheckpointPolicy::Final;

  void validate() const;
};

/// B=32, 3000 iters, fixed lr 3e-4, betas (0.9, 0.999), uniform decay 0.01,
/// no clipping, final-model checkpoint.
TrainConfig baseline_train_config();
/// B=64, 5000 iters, warmup 100 + cosine to 5000 between 1e-3 and 1e-4,
/// betas (0.9, 0.99), grouped decay 0.1, clip 1.0, best-val checkpoint.
TrainConfig stronger_train_config();

struct LossRecord {
  std::size_t step = 0;
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
  double wall_time_s = 0;
};

struct GradNormRecord {
  std::size_t step = 0;
  double pre_clip = 0;
  double post_clip = 0;
};

template <typename T>
struct Snapshot {
  std::size_t step = 0;
  double val_loss = 0;
  GptParams<T> params;
};

/// Keeps a deep copy of the parameters with the lowest validation loss seen.
/// Only a strict improvement replaces the snapshot, so ties keep the earliest.
template <typename T>
class BestCheckpointSelector {
 public:
  /// Returns true when this evaluation became the new best.
  bool offer(std::size_t step, double val_loss, const GptParams<T>& params);
  const std::optional<Snapshot<T>>& best() const noexcept { return best_; }

 private:
  std::optional<Snapshot<T>> best_;
};

/// Mean loss over eval_iters sampled batches, dropout off, nothing recorded.
template <typename T>
double estimate_loss(const Gpt<T>& model, const TokenStore& store, Split split, std::size_t eval_iters,
                     std::size_t batch_size, RandomState& rng);

struct TrainHooks {
  std::function<void(const LossRecord&)> on_eval;
  std::function<void(const Snapshot<float>&)> on_best;
};

struct TrainResult {
  ModelConfig model_config;
  GptParams<float> final_params;
  std::optional<Snapshot<float>> best;
  std::vector<LossRecord> log;
  std::vector<GradNormRecord> grad_norms;
  double elapsed_s = 0;
};

/// Runs the full loop. One RandomState seeded with cfg.seed is consumed in
/// this order: parameter init; then for each step, the evaluation draws (train
/// split, then val split) when the step is an evaluation point, followed by
/// the training batch and the dropout masks of that step.
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg, const TokenStore& store,
                  const TrainHooks& hooks = {});

/// Same loop starting from given parameters (used by tests and fine-tuning).
TrainResult train_from(Gpt<float> model, const TrainConfig& cfg, const TokenStore& store, RandomState rng,
                       const TrainHooks& hooks = {});

double perplexity(double loss);

}  // namespace minigpt
