#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "minigpt/model.hpp"
#include "minigpt/tensor.hpp"

namespace minigpt {

/// Decay group: tensors with two or more dimensions. No-decay group: the rest.
template <typename T>
struct ParamGroups {
  std::vector<NamedParam<T>> decay;
  std::vector<NamedParam<T>> no_decay;
};

/// Splits parameters by rank; a storage shared by several entries is kept once.
template <typename T>
ParamGroups<T> partition_params(const std::vector<NamedParam<T>>& params);

/// Everything in one group (used when weight decay applies uniformly).
template <typename T>
ParamGroups<T> single_group(const std::vector<NamedParam<T>>& params);

struct ScheduleConfig {
  double max_lr = 1e-3;
  double min_lr = 1e-4;
  std::size_t warmup_steps = 100;
  std::size_t decay_steps = 5000;

  void validate() const;
};

/// Linear warmup reaching max_lr at step warmup_steps - 1, half-cosine down to
/// min_lr at decay_steps, then flat at min_lr.
double lr_at(std::size_t step, const ScheduleConfig& sched);

/// Scales all gradients jointly so their global L2 norm is at most max_norm.
/// Returns the norm before clipping. Throws DivergenceError on a non-finite
/// gradient (reported step 0; callers rethrow with their own step).
template <typename T>
double clip_grad_global_norm(std::span<Tensor<T>> params, double max_norm);

/// Global L2 norm of the gradients (missing gradients count as zero).
template <typename T>
double grad_global_norm(std::span<const Tensor<T>> params);

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay_weight_decay = 0.0;     // applied to ParamGroups::decay
  double no_decay_weight_decay = 0.0;  // applied to ParamGroups::no_decay
};

template <typename T>
class AdamW {
 public:
  AdamW(ParamGroups<T> groups, AdamWHyper hyper);

  /// One bias-corrected AdamW update with decoupled decay:
  /// theta -= lr * (m_hat / (sqrt(v_hat) + eps) + lambda * theta).
  /// Parameters without a gradient are treated as having a zero gradient.
  void step(double lr);

  void zero_grad();
  std::size_t step_count() const noexcept { return t_; }
  const AdamWHyper& hyper() const noexcept { return hyper_; }
  const ParamGroups<T>& groups() const noexcept { return groups_; }
  /// All parameter tensors, decay group first.
  std::vector<Tensor<T>> tensors() const;
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

 private:
  struct Slot {
    Tensor<T> param;
    double weight_decay;
  };
  ParamGroups<T> groups_;
  AdamWHyper hyper_;
  std::vector<Slot> slots_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace minigpt
