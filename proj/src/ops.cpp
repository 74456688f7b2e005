#include "minigpt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "minigpt/error.hpp"
#include "minigpt/kernels.hpp"

namespace minigpt::ops {
namespace {

template <typename T>
bool wants_grad(const TensorImpl<T>* t) {
  return t->requires_grad;
}

Shape leading(const Shape& s, std::size_t drop) { return Shape(s.begin(), s.end() - static_cast<long>(drop)); }

Shape strip_leading_ones(Shape s) {
  auto first = std::find_if(s.begin(), s.end(), [](std::size_t d) { return d != 1; });
  if (first == s.end()) return {1};
  return Shape(first, s.end());
}

}  // namespace

template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() < 2 || b.rank() < 2)
    throw ShapeError("matmul needs rank >= 2 operands, got " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const std::size_t m = a.shape()[a.rank() - 2];
  const std::size_t k = a.shape()[a.rank() - 1];
  const std::size_t n = b.shape()[b.rank() - 1];
  if (b.shape()[b.rank() - 2] != k)
    throw ShapeError("matmul: inner dimensions differ between " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  const Shape a_lead = leading(a.shape(), 2);
  const Shape b_lead = leading(b.shape(), 2);
  if (!a_lead.empty() && !b_lead.empty() && a_lead != b_lead)
    throw ShapeError("matmul: batch dimensions differ between " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));

  const bool a_batched = !a_lead.empty();
  const bool b_batched = !b_lead.empty();
  Shape out_shape = a_batched ? a_lead : b_lead;
  const std::size_t batch = shape_numel(out_shape);
  out_shape.push_back(m);
  out_shape.push_back(n);
  auto out = Tensor<T>::zeros(out_shape);

  const T* ad = a.data().data();
  const T* bd = b.data().data();
  if (!b_batched) {
    kernels::gemm<T>(false, false, {1, batch * m, n, k}, ad, 0, bd, 0, out.data().data(), false);
  } else {
    kernels::gemm<T>(false, false, {batch, m, n, k}, ad, a_batched ? m * k : 0, bd, k * n, out.data().data(),
                     false);
  }

  if (tape.wants({&a, &b})) {
    auto* ai = a.impl().get();
    auto* bi = b.impl().get();
    auto* oi = out.impl().get();
    tape.record("matmul", {&a, &b}, out, [=] {
      const T* dc = oi->grad.data();
      if (wants_grad(ai)) {
        T* da = grad_of(*ai).data();
        if (!b_batched) {
          kernels::gemm<T>(false, true, {1, batch * m, k, n}, dc, 0, bi->data.data(), 0, da, true);
        } else if (a_batched) {
          kernels::gemm<T>(false, true, {batch, m, k, n}, dc, m * n, bi->data.data(), k * n, da, true);
        } else {
          for (std::size_t i = 0; i < batch; ++i)
            kernels::gemm<T>(false, true, {1, m, k, n}, dc + i * m * n, 0, bi->data.data() + i * k * n, 0, da,
                             true);
        }
      }
      if (wants_grad(bi)) {
        T* db = grad_of(*bi).data();
        if (!b_batched) {
          kernels::gemm<T>(true, false, {1, k, n, batch * m}, ai->data.data(), 0, dc, 0, db, true);
        } else {
          kernels::gemm<T>(true, false, {batch, k, n, m}, ai->data.data(), a_batched ? m * k : 0, dc, m * n, db,
                           true);
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  const Shape bs = strip_leading_ones(b.shape());
  const Shape& as = a.shape();
  const bool suffix = bs.size() <= as.size() && std::equal(bs.begin(), bs.end(), as.end() - static_cast<long>(bs.size()));
  if (!(as == b.shape() || suffix))
    throw ShapeError("add: cannot broadcast " + shape_str(b.shape()) + " onto " + shape_str(as));
  const std::size_t width = b.numel();
  const std::size_t rows = a.numel() / width;
  auto out = Tensor<T>::from(as, std::vector<T>(a.data().begin(), a.data().end()));
  T* od = out.data().data();
  const T* bd = b.data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < width; ++j) od[r * width + j] += bd[j];

  if (tape.wants({&a, &b})) {
    auto* ai = a.impl().get();
    auto* bi = b.impl().get();
    auto* oi = out.impl().get();
    tape.record("add", {&a, &b}, out, [=] {
      const T* g = oi->grad.data();
      if (wants_grad(ai)) {
        T* da = grad_of(*ai).data();
        for (std::size_t i = 0; i < rows * width; ++i) da[i] += g[i];
      }
      if (wants_grad(bi)) {
        T* db = grad_of(*bi).data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < width; ++j) db[j] += g[r * width + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("mul: shapes differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  auto out = Tensor<T>::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (tape.wants({&a, &b})) {
    auto* ai = a.impl().get();
    auto* bi = b.impl().get();
    auto* oi = out.impl().get();
    tape.record("mul", {&a, &b}, out, [=] {
      const std::size_t n = oi->data.size();
      if (wants_grad(ai)) {
        T* da = grad_of(*ai).data();
        for (std::size_t i = 0; i < n; ++i) da[i] += oi->grad[i] * bi->data[i];
      }
      if (wants_grad(bi)) {
        T* db = grad_of(*bi).data();
        for (std::size_t i = 0; i < n; ++i) db[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& x, T factor) {
  auto out = Tensor<T>::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * factor;
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("scale", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      for (std::size_t i = 0; i < oi->grad.size(); ++i) dx[i] += oi->grad[i] * factor;
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  auto out = Tensor<T>::scalar(total);
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("sum", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const T g = oi->grad[0];
      for (std::size_t i = 0; i < xi->data.size(); ++i) dx[i] += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> layer_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  const std::size_t d = x.shape().back();
  if (d == 0) throw ShapeError("layer_norm: last dimension is empty");
  if (gain.numel() != d || bias.numel() != d)
    throw ShapeError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " + shape_str(bias.shape()) +
                     " do not match last dim of " + shape_str(x.shape()));
  if (!(eps > T(0))) throw std::invalid_argument("layer_norm: eps must be positive");
  const std::size_t rows = x.numel() / d;
  auto out = Tensor<T>::zeros(x.shape());
  auto stats = std::make_shared<std::vector<T>>(2 * rows);
  kernels::layer_norm_rows<T>(rows, d, x.data().data(), gain.data().data(), bias.data().data(), eps,
                              out.data().data(), stats->data(), stats->data() + rows);

  if (tape.wants({&x, &gain, &bias})) {
    auto* xi = x.impl().get();
    auto* gi = gain.impl().get();
    auto* bi = bias.impl().get();
    auto* oi = out.impl().get();
    tape.record("layer_norm", {&x, &gain, &bias}, out, [=] {
      const T* dy = oi->grad.data();
      const T* xd = xi->data.data();
      const T* g = gi->data.data();
      const T* mean = stats->data();
      const T* rstd = stats->data() + rows;
      if (wants_grad(xi)) {
        T* dx = grad_of(*xi).data();
#pragma omp parallel for schedule(static) if (rows * d >= (1u << 14))
        for (std::size_t r = 0; r < rows; ++r) {
          T mean_g = 0, mean_gx = 0;
          for (std::size_t j = 0; j < d; ++j) {
            const T xhat = (xd[r * d + j] - mean[r]) * rstd[r];
            const T gj = dy[r * d + j] * g[j];
            mean_g += gj;
            mean_gx += gj * xhat;
          }
          mean_g /= static_cast<T>(d);
          mean_gx /= static_cast<T>(d);
          for (std::size_t j = 0; j < d; ++j) {
            const T xhat = (xd[r * d + j] - mean[r]) * rstd[r];
            dx[r * d + j] += rstd[r] * (dy[r * d + j] * g[j] - mean_g - xhat * mean_gx);
          }
        }
      }
      if (wants_grad(gi) || wants_grad(bi)) {
        T* dg = wants_grad(gi) ? grad_of(*gi).data() : nullptr;
        T* db = wants_grad(bi) ? grad_of(*bi).data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) {
            if (dg) dg[j] += dy[r * d + j] * (xd[r * d + j] - mean[r]) * rstd[r];
            if (db) db[j] += dy[r * d + j];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> gelu(Tape<T>& tape, const Tensor<T>& x) {
  auto out = Tensor<T>::zeros(x.shape());
  kernels::gelu<T>(x.numel(), x.data().data(), out.data().data());
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("gelu", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const std::size_t n = xi->data.size();
      kernels::gelu_backward<T>(n, xi->data.data(), oi->grad.data(), dx);
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax_lastdim(Tape<T>& tape, const Tensor<T>& x) {
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.numel() / n;
  auto out = Tensor<T>::zeros(x.shape());
  if (!kernels::softmax_rows<T>(rows, n, x.data().data(), out.data().data()))
    throw std::domain_error("softmax_lastdim: a row of " + shape_str(x.shape()) +
                            " is entirely -inf (malformed mask)");
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("softmax_lastdim", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const T* y = oi->data.data();
      const T* dy = oi->grad.data();
#pragma omp parallel for schedule(static) if (rows * n >= (1u << 14))
      for (std::size_t r = 0; r < rows; ++r) {
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += dy[r * n + j] * y[r * n + j];
        for (std::size_t j = 0; j < n; ++j) dx[r * n + j] += y[r * n + j] * (dy[r * n + j] - dot);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> embedding_lookup(Tape<T>& tape, const Tensor<T>& table, const IdTensor& ids) {
  if (table.rank() != 2) throw ShapeError("embedding_lookup: table must be [V, d], got " + shape_str(table.shape()));
  const std::size_t vocab = table.dim(0);
  const std::size_t d = table.dim(1);
  for (auto id : ids.data)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw std::out_of_range("embedding_lookup: id " + std::to_string(id) + " outside [0, " +
                              std::to_string(vocab) + ")");
  Shape out_shape = ids.shape;
  out_shape.push_back(d);
  auto out = Tensor<T>::zeros(out_shape);
  const T* td = table.data().data();
  T* od = out.data().data();
  for (std::size_t i = 0; i < ids.numel(); ++i)
    std::copy_n(td + static_cast<std::size_t>(ids.data[i]) * d, d, od + i * d);

  if (tape.wants({&table})) {
    auto* ti = table.impl().get();
    auto* oi = out.impl().get();
    auto idx = std::make_shared<std::vector<std::int32_t>>(ids.data);
    tape.record("embedding_lookup", {&table}, out, [=] {
      T* dt = grad_of(*ti).data();
      const T* g = oi->grad.data();
      for (std::size_t i = 0; i < idx->size(); ++i) {
        T* row = dt + static_cast<std::size_t>((*idx)[i]) * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += g[i * d + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> cross_entropy_mean(Tape<T>& tape, const Tensor<T>& logits, const IdTensor& targets) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy_mean: logits must be [N, V], got " + shape_str(logits.shape()));
  const std::size_t rows = logits.dim(0);
  const std::size_t vocab = logits.dim(1);
  if (targets.numel() != rows)
    throw ShapeError("cross_entropy_mean: " + std::to_string(targets.numel()) + " targets for " +
                     std::to_string(rows) + " rows");
  for (auto t : targets.data)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      throw std::out_of_range("cross_entropy_mean: target " + std::to_string(t) + " outside [0, " +
                              std::to_string(vocab) + ")");

  const T* ld = logits.data().data();
  auto lse = std::make_shared<std::vector<T>>(rows);
  double total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = ld + r * vocab;
    const T mx = *std::max_element(row, row + vocab);
    T s = 0;
    for (std::size_t j = 0; j < vocab; ++j) s += std::exp(row[j] - mx);
    (*lse)[r] = mx + std::log(s);
    total += static_cast<double>((*lse)[r] - row[targets.data[r]]);
  }
  auto out = Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(rows)));

  if (tape.wants({&logits})) {
    auto* li = logits.impl().get();
    auto* oi = out.impl().get();
    auto tgt = std::make_shared<std::vector<std::int32_t>>(targets.data);
    tape.record("cross_entropy_mean", {&logits}, out, [=] {
      T* dl = grad_of(*li).data();
      const T g = oi->grad[0] / static_cast<T>(rows);
      const T* x = li->data.data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < vocab; ++j) dl[r * vocab + j] += g * std::exp(x[r * vocab + j] - (*lse)[r]);
        dl[r * vocab + static_cast<std::size_t>((*tgt)[r])] -= g;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> dropout(Tape<T>& tape, const Tensor<T>& x, double p, bool training, RandomState& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: p must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(x.numel());
  for (auto& m : *mask) m = rng.uniform() >= p ? keep_scale : T(0);
  auto out = Tensor<T>::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * (*mask)[i];
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("dropout", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      for (std::size_t i = 0; i < mask->size(); ++i) dx[i] += oi->grad[i] * (*mask)[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> transpose_last_two(Tape<T>& tape, const Tensor<T>& x) {
  if (x.rank() < 2) throw ShapeError("transpose_last_two: rank < 2 for " + shape_str(x.shape()));
  const std::size_t r = x.shape()[x.rank() - 2];
  const std::size_t c = x.shape()[x.rank() - 1];
  const std::size_t batch = x.numel() / (r * c);
  Shape out_shape = x.shape();
  std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
  auto out = Tensor<T>::zeros(out_shape);
  const T* xd = x.data().data();
  T* od = out.data().data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) od[b * r * c + j * r + i] = xd[b * r * c + i * c + j];
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("transpose_last_two", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const T* g = oi->grad.data();
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) dx[b * r * c + i * c + j] += g[b * r * c + j * r + i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw ShapeError("reshape: " + shape_str(x.shape()) + " cannot become " + shape_str(shape));
  auto out = Tensor<T>::from(std::move(shape), std::vector<T>(x.data().begin(), x.data().end()));
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("reshape", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      for (std::size_t i = 0; i < oi->grad.size(); ++i) dx[i] += oi->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> split_heads(Tape<T>& tape, const Tensor<T>& x, std::size_t heads) {
  if (x.rank() != 3) throw ShapeError("split_heads expects [B, T, C], got " + shape_str(x.shape()));
  const std::size_t B = x.dim(0), T_ = x.dim(1), C = x.dim(2);
  if (heads == 0 || C % heads != 0)
    throw ShapeError("split_heads: channel dim " + std::to_string(C) + " not divisible by " + std::to_string(heads));
  const std::size_t dh = C / heads;
  auto out = Tensor<T>::zeros({B, heads, T_, dh});
  const T* xd = x.data().data();
  T* od = out.data().data();
  auto src = [=](std::size_t b, std::size_t h, std::size_t t, std::size_t e) { return (b * T_ + t) * C + h * dh + e; };
  auto dst = [=](std::size_t b, std::size_t h, std::size_t t, std::size_t e) {
    return ((b * heads + h) * T_ + t) * dh + e;
  };
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t t = 0; t < T_; ++t)
        for (std::size_t e = 0; e < dh; ++e) od[dst(b, h, t, e)] = xd[src(b, h, t, e)];
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("split_heads", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const T* g = oi->grad.data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t h = 0; h < heads; ++h)
          for (std::size_t t = 0; t < T_; ++t)
            for (std::size_t e = 0; e < dh; ++e) dx[src(b, h, t, e)] += g[dst(b, h, t, e)];
    });
  }
  return out;
}

template <typename T>
Tensor<T> merge_heads(Tape<T>& tape, const Tensor<T>& x) {
  if (x.rank() != 4) throw ShapeError("merge_heads expects [B, H, T, dh], got " + shape_str(x.shape()));
  const std::size_t B = x.dim(0), H = x.dim(1), T_ = x.dim(2), dh = x.dim(3);
  const std::size_t C = H * dh;
  auto out = Tensor<T>::zeros({B, T_, C});
  const T* xd = x.data().data();
  T* od = out.data().data();
  auto src = [=](std::size_t b, std::size_t h, std::size_t t, std::size_t e) { return ((b * H + h) * T_ + t) * dh + e; };
  auto dst = [=](std::size_t b, std::size_t h, std::size_t t, std::size_t e) { return (b * T_ + t) * C + h * dh + e; };
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t t = 0; t < T_; ++t)
        for (std::size_t e = 0; e < dh; ++e) od[dst(b, h, t, e)] = xd[src(b, h, t, e)];
  if (tape.wants({&x})) {
    auto* xi = x.impl().get();
    auto* oi = out.impl().get();
    tape.record("merge_heads", {&x}, out, [=] {
      T* dx = grad_of(*xi).data();
      const T* g = oi->grad.data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t h = 0; h < H; ++h)
          for (std::size_t t = 0; t < T_; ++t)
            for (std::size_t e = 0; e < dh; ++e) dx[src(b, h, t, e)] += g[dst(b, h, t, e)];
    });
  }
  return out;
}

template <typename T>
Tensor<T> masked_fill_causal(Tape<T>& tape, const Tensor<T>& scores) {
  if (scores.rank() < 2) throw ShapeError("masked_fill_causal: rank < 2 for " + shape_str(scores.shape()));
  const std::size_t n = scores.shape().back();
  if (scores.shape()[scores.rank() - 2] != n)
    throw ShapeError("masked_fill_causal: last two dims must be square, got " + shape_str(scores.shape()));
  const std::size_t mats = scores.numel() / (n * n);
  auto out = Tensor<T>::from(scores.shape(), std::vector<T>(scores.data().begin(), scores.data().end()));
  T* od = out.data().data();
  constexpr T kNegInf = -std::numeric_limits<T>::infinity();
  for (std::size_t b = 0; b < mats; ++b)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) od[(b * n + i) * n + j] = kNegInf;
  if (tape.wants({&scores})) {
    auto* si = scores.impl().get();
    auto* oi = out.impl().get();
    tape.record("masked_fill_causal", {&scores}, out, [=] {
      T* ds = grad_of(*si).data();
      const T* g = oi->grad.data();
      for (std::size_t b = 0; b < mats; ++b)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j <= i; ++j) ds[(b * n + i) * n + j] += g[(b * n + i) * n + j];
    });
  }
  return out;
}

#define MINIGPT_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> matmul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> add(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scale(Tape<T>&, const Tensor<T>&, T);                                          \
  template Tensor<T> sum(Tape<T>&, const Tensor<T>&);                                               \
  template Tensor<T> layer_norm(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T); \
  template Tensor<T> gelu(Tape<T>&, const Tensor<T>&);                                              \
  template Tensor<T> softmax_lastdim(Tape<T>&, const Tensor<T>&);                                   \
  template Tensor<T> embedding_lookup(Tape<T>&, const Tensor<T>&, const IdTensor&);                 \
  template Tensor<T> cross_entropy_mean(Tape<T>&, const Tensor<T>&, const IdTensor&);               \
  template Tensor<T> dropout(Tape<T>&, const Tensor<T>&, double, bool, RandomState&);               \
  template Tensor<T> transpose_last_two(Tape<T>&, const Tensor<T>&);                                \
  template Tensor<T> reshape(Tape<T>&, const Tensor<T>&, Shape);                                    \
  template Tensor<T> split_heads(Tape<T>&, const Tensor<T>&, std::size_t);                          \
  template Tensor<T> merge_heads(Tape<T>&, const Tensor<T>&);                                       \
  template Tensor<T> masked_fill_causal(Tape<T>&, const Tensor<T>&);

MINIGPT_INSTANTIATE_OPS(float)
MINIGPT_INSTANTIATE_OPS(double)

#undef MINIGPT_INSTANTIATE_OPS

}  // namespace minigpt::ops
