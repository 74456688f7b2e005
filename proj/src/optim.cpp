#include "minigpt/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "minigpt/error.hpp"

namespace minigpt {

template <typename T>
ParamGroups<T> partition_params(const std::vector<NamedParam<T>>& params) {
  ParamGroups<T> groups;
  std::unordered_set<const TensorImpl<T>*> seen;
  for (const auto& p : params) {
    if (!seen.insert(p.tensor.impl().get()).second) continue;
    (p.tensor.rank() >= 2 ? groups.decay : groups.no_decay).push_back(p);
  }
  return groups;
}

template <typename T>
ParamGroups<T> single_group(const std::vector<NamedParam<T>>& params) {
  ParamGroups<T> groups;
  std::unordered_set<const TensorImpl<T>*> seen;
  for (const auto& p : params)
    if (seen.insert(p.tensor.impl().get()).second) groups.decay.push_back(p);
  return groups;
}

void ScheduleConfig::validate() const {
  if (!(max_lr > 0 && min_lr > 0)) throw ConfigError("learning rates must be positive");
  if (min_lr > max_lr) throw ConfigError("min_lr must not exceed max_lr");
  if (warmup_steps == 0) throw ConfigError("warmup_steps must be >= 1");
  if (warmup_steps >= decay_steps) throw ConfigError("warmup_steps must be smaller than decay_steps");
}

double lr_at(std::size_t step, const ScheduleConfig& s) {
  if (step < s.warmup_steps)
    return s.max_lr * static_cast<double>(step + 1) / static_cast<double>(s.warmup_steps);
  if (step > s.decay_steps) return s.min_lr;
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(s.decay_steps - s.warmup_steps);
  return s.min_lr + 0.5 * (s.max_lr - s.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
double grad_global_norm(std::span<const Tensor<T>> params) {
  double sq = 0;
  for (const auto& p : params)
    for (T g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

template <typename T>
double clip_grad_global_norm(std::span<Tensor<T>> params, double max_norm) {
  if (!(max_norm > 0)) throw std::invalid_argument("clip_grad_global_norm: max_norm must be positive");
  const double norm = grad_global_norm<T>(std::span<const Tensor<T>>(params.data(), params.size()));
  if (!std::isfinite(norm)) throw DivergenceError("non-finite gradient norm", 0);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params)
      for (T& g : p.grad()) g = static_cast<T>(g * factor);
  }
  return norm;
}

template <typename T>
AdamW<T>::AdamW(ParamGroups<T> groups, AdamWHyper hyper) : groups_(std::move(groups)), hyper_(hyper) {
  for (const auto& p : groups_.decay) slots_.push_back({p.tensor, hyper_.decay_weight_decay});
  for (const auto& p : groups_.no_decay) slots_.push_back({p.tensor, hyper_.no_decay_weight_decay});
  for (const auto& s : slots_) {
    m_.emplace_back(s.param.numel(), 0.0);
    v_.emplace_back(s.param.numel(), 0.0);
  }
}

template <typename T>
void AdamW<T>::step(double lr) {
  if (!(lr > 0)) throw std::invalid_argument("AdamW::step: lr must be positive");
  ++t_;
  const double b1 = hyper_.beta1, b2 = hyper_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    Tensor<T>& param = slots_[s].param;
    const double decay = slots_[s].weight_decay;
    auto theta = param.data();
    const auto grad = param.grad();
    auto& m = m_[s];
    auto& v = v_[s];
    bool finite = true;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      const double th = static_cast<double>(theta[i]);
      const double updated = th - lr * (m_hat / (std::sqrt(v_hat) + hyper_.eps) + decay * th);
      theta[i] = static_cast<T>(updated);
      finite = finite && std::isfinite(updated);
    }
    if (!finite) throw DivergenceError("non-finite parameter after AdamW step " + std::to_string(t_), t_);
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

template <typename T>
std::vector<Tensor<T>> AdamW<T>::tensors() const {
  std::vector<Tensor<T>> out;
  for (const auto& s : slots_) out.push_back(s.param);
  return out;
}

template ParamGroups<float> partition_params(const std::vector<NamedParam<float>>&);
template ParamGroups<double> partition_params(const std::vector<NamedParam<double>>&);
template ParamGroups<float> single_group(const std::vector<NamedParam<float>>&);
template ParamGroups<double> single_group(const std::vector<NamedParam<double>>&);
template double clip_grad_global_norm<float>(std::span<Tensor<float>>, double);
template double clip_grad_global_norm<double>(std::span<Tensor<double>>, double);
template double grad_global_norm<float>(std::span<const Tensor<float>>);
template double grad_global_norm<double>(std::span<const Tensor<double>>);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace minigpt
