#include "minigpt/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "minigpt/error.hpp"

namespace minigpt {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_iters == 0) throw ConfigError("max_iters must be >= 1");
  if (eval_interval == 0 || eval_interval > max_iters) throw ConfigError("eval_interval must lie in [1, max_iters]");
  if (eval_iters == 0) throw ConfigError("eval_iters must be >= 1");
  if (lr.kind == LrPolicy::Kind::Fixed && !(lr.fixed_lr > 0)) throw ConfigError("learning_rate must be positive");
  if (lr.kind == LrPolicy::Kind::WarmupCosine) lr.schedule.validate();
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
  if (clip_norm && !(*clip_norm > 0)) throw ConfigError("clip_norm must be positive");
}

TrainConfig baseline_train_config() { return TrainConfig{}; }

TrainConfig stronger_train_config() {
  TrainConfig c;
  c.batch_size = 64;
  c.max_iters = 5000;
  c.lr.kind = LrPolicy::Kind::WarmupCosine;
  c.lr.schedule = ScheduleConfig{1e-3, 1e-4, 100, 5000};
  c.beta1 = 0.9;
  c.beta2 = 0.99;
  c.weight_decay = 0.1;
  c.decay_mode = WeightDecayMode::Grouped;
  c.clip_norm = 1.0;
  c.policy = CheckpointPolicy::BestVal;
  return c;
}

template <typename T>
bool BestCheckpointSelector<T>::offer(std::size_t step, double val_loss, const GptParams<T>& params) {
  if (best_ && !(val_loss < best_->val_loss)) return false;
  best_ = Snapshot<T>{step, val_loss, params.clone()};
  return true;
}

template <typename T>
double estimate_loss(const Gpt<T>& model, const TokenStore& store, Split split, std::size_t eval_iters,
                     std::size_t batch_size, RandomState& rng) {
  if (eval_iters == 0) throw std::invalid_argument("estimate_loss: eval_iters must be >= 1");
  double total = 0;
  for (std::size_t i = 0; i < eval_iters; ++i) {
    const Batch batch = sample_batch(store, split, batch_size, rng);
    auto tape = Tape<T>::inference();
    const auto out = model.forward(tape, batch.x, &batch.y, false, nullptr);
    total += static_cast<double>(out.loss->item());
  }
  return total / static_cast<double>(eval_iters);
}

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg, const TokenStore& store,
                  const TrainHooks& hooks) {
  model_cfg.validate();
  if (store.block_size != model_cfg.block_size)
    throw ConfigError("token store block size " + std::to_string(store.block_size) + " differs from model block_size " +
                      std::to_string(model_cfg.block_size));
  RandomState rng(cfg.seed);
  Gpt<float> model(model_cfg, rng);
  return train_from(std::move(model), cfg, store, rng, hooks);
}

TrainResult train_from(Gpt<float> model, const TrainConfig& cfg, const TokenStore& store, RandomState rng,
                       const TrainHooks& hooks) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  const auto named = model.params().named();
  ParamGroups<float> groups =
      cfg.decay_mode == WeightDecayMode::Grouped ? partition_params(named) : single_group(named);
  AdamWHyper hyper{cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay,
                   cfg.decay_mode == WeightDecayMode::Grouped ? 0.0 : cfg.weight_decay};
  AdamW<float> opt(std::move(groups), hyper);
  std::vector<Tensor<float>> tensors = opt.tensors();

  TrainResult result;
  result.model_config = model.config();
  BestCheckpointSelector<float> selector;

  for (std::size_t step = 0;; ++step) {
    if (step % cfg.eval_interval == 0 || step == cfg.max_iters) {
      LossRecord rec;
      rec.step = step;
      rec.train_loss = estimate_loss(model, store, Split::Train, cfg.eval_iters, cfg.batch_size, rng);
      rec.val_loss = estimate_loss(model, store, Split::Val, cfg.eval_iters, cfg.batch_size, rng);
      rec.lr = cfg.lr.at(std::min(step, cfg.max_iters - 1));
      rec.wall_time_s = seconds();
      if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss))
        throw DivergenceError("non-finite evaluation loss at step " + std::to_string(step), step);
      result.log.push_back(rec);
      if (hooks.on_eval) hooks.on_eval(rec);
      if (cfg.policy == CheckpointPolicy::BestVal && selector.offer(step, rec.val_loss, model.params()) &&
          hooks.on_best)
        hooks.on_best(*selector.best());
    }
    if (step == cfg.max_iters) break;

    const Batch batch = sample_batch(store, Split::Train, cfg.batch_size, rng);
    Tape<float> tape;
    const auto out = model.forward(tape, batch.x, &batch.y, true, &rng);
    const float loss = out.loss->item();
    if (!std::isfinite(loss)) throw DivergenceError("non-finite training loss at step " + std::to_string(step), step);
    opt.zero_grad();
    tape.backward(*out.loss);
    if (cfg.clip_norm) {
      GradNormRecord norms{step, 0, 0};
      try {
        norms.pre_clip = clip_grad_global_norm<float>(tensors, *cfg.clip_norm);
      } catch (const DivergenceError&) {
        throw DivergenceError("non-finite gradient at step " + std::to_string(step), step);
      }
      norms.post_clip = grad_global_norm<float>(tensors);
      result.grad_norms.push_back(norms);
    }
    try {
      opt.step(cfg.lr.at(step));
    } catch (const DivergenceError&) {
      throw DivergenceError("non-finite parameter after step " + std::to_string(step), step);
    }
  }

  result.best = selector.best();
  result.elapsed_s = seconds();
  result.final_params = std::move(model.params());
  return result;
}

double perplexity(double loss) { return std::exp(loss); }

template class BestCheckpointSelector<float>;
template class BestCheckpointSelector<double>;
template double estimate_loss<float>(const Gpt<float>&, const TokenStore&, Split, std::size_t, std::size_t,
                                     RandomState&);
template double estimate_loss<double>(const Gpt<double>&, const TokenStore&, Split, std::size_t, std::size_t,
                                      RandomState&);

}  // namespace minigpt
