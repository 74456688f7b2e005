#pragma once

// Central finite-difference oracle for the autograd tests. Everything runs in
// double precision; the relative error of one entry is
// |a - n| / max(|a|, |n|, 1e-8).

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "minigpt/ops.hpp"
#include "minigpt/tensor.hpp"

namespace gradcheck {

using minigpt::Tape;
using minigpt::Tensor;
using LossFn = std::function<Tensor<double>(Tape<double>&)>;

struct Result {
  double max_rel_error = 0;
  std::string worst;  // "name[index]"
  std::size_t checked = 0;
};

inline double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

/// Compares d(loss)/d(input) from one backward sweep against central
/// differences for every element of every input.
inline Result check(std::vector<std::pair<std::string, Tensor<double>>> inputs, const LossFn& loss_fn,
                    double h = 1e-4) {
  for (auto& [name, t] : inputs) {
    t.set_requires_grad(true);
    t.ensure_grad();
    t.zero_grad();
  }
  {
    Tape<double> tape;
    tape.backward(loss_fn(tape));
  }
  Result r;
  for (auto& [name, t] : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      auto eval = [&](double v) {
        data[i] = v;
        auto tape = Tape<double>::inference();
        return loss_fn(tape).item();
      };
      const double numeric = (eval(saved + h) - eval(saved - h)) / (2 * h);
      data[i] = saved;
      const double e = rel_error(analytic[i], numeric);
      if (e > r.max_rel_error) {
        r.max_rel_error = e;
        r.worst = name + "[" + std::to_string(i) + "]";
      }
      ++r.checked;
    }
  }
  return r;
}

/// Reduces a non-scalar output to a scalar with fixed pseudo-random weights,
/// so that every output entry carries a distinct upstream gradient.
inline Tensor<double> weighted_sum(Tape<double>& tape, const Tensor<double>& y) {
  std::vector<double> w(y.numel());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(1.0 + 0.7 * static_cast<double>(i));
  const auto weights = Tensor<double>::from(y.shape(), std::move(w));
  return minigpt::ops::sum(tape, minigpt::ops::mul(tape, y, weights));
}

}  // namespace gradcheck
