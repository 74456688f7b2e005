#pragma once

// Dense numeric kernels behind the autograd ops.
//
// Every kernel exists twice: an OpenMP-parallel version in minigpt::kernels
// and a plain serial version in minigpt::kernels::reference. The reference
// code is the readable definition and is what the kernel tests compare
// against; the parallel code is what the engine runs. Parallel kernels split
// work only across independent output elements and keep a fixed reduction
// order per element, so their results do not depend on the thread count.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <type_traits>

namespace minigpt::kernels {

struct GemmShape {
  std::size_t batch = 1;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
};

/// C[b] = op(A[b]) * op(B[b]) for b in [0, batch), or += when accumulate.
/// A is stored [m, k] (or [k, m] when trans_a), B is stored [k, n] (or [n, k]
/// when trans_b), C is [m, n]. All row-major. A batch stride of 0 reuses the
/// same operand for every batch entry. C is always densely batched.
template <typename T>
void gemm(bool trans_a, bool trans_b, const GemmShape& shape, const T* a, std::size_t a_batch_stride,
          const T* b, std::size_t b_batch_stride, T* c, bool accumulate);

/// Row-wise softmax over `n` columns with max subtraction. Returns false if
/// some row has no finite entry (every entry -inf); that row is left as NaN.
template <typename T>
bool softmax_rows(std::size_t rows, std::size_t n, const T* x, T* y);

/// Row-wise layer normalization with population variance. Writes the
/// per-row mean and reciprocal standard deviation for the backward pass.
template <typename T>
void layer_norm_rows(std::size_t rows, std::size_t d, const T* x, const T* gain, const T* bias, T eps,
                     T* y, T* mean, T* rstd);

/// Elementwise tanh-approximation GELU.
template <typename T>
void gelu(std::size_t n, const T* x, T* y);

/// dx += dy * gelu'(x).
template <typename T>
void gelu_backward(std::size_t n, const T* x, const T* dy, T* dx);

/// Threads used by the parallel kernels (defaults to the OpenMP default).
void set_num_threads(int threads);
int num_threads();

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, const GemmShape& shape, const T* a, std::size_t a_batch_stride,
          const T* b, std::size_t b_batch_stride, T* c, bool accumulate);

template <typename T>
bool softmax_rows(std::size_t rows, std::size_t n, const T* x, T* y);

template <typename T>
void layer_norm_rows(std::size_t rows, std::size_t d, const T* x, const T* gain, const T* bias, T eps,
                     T* y, T* mean, T* rstd);

template <typename T>
void gelu(std::size_t n, const T* x, T* y);

template <typename T>
void gelu_backward(std::size_t n, const T* x, const T* dy, T* dx);

}  // namespace reference

/// exp that vectorizes: std::exp for double, a range-reduced polynomial
/// (within 2 ulp on the normal range) for float. Underflows to 0 below
/// about -87.3, including -inf, and saturates near FLT_MAX above ln(FLT_MAX).
template <typename T>
inline T fast_exp(T x) {
  if constexpr (std::is_same_v<T, float>) {
    const float xc = std::min(std::max(x, -87.3f), 88.72283f);
    constexpr float kRound = 12582912.0f;  // 1.5 * 2^23: adding it rounds to an integer
    // n stays <= 127 so the scale below is a finite power of two.
    const float n = std::min((xc * 1.44269504088896341f + kRound) - kRound, 127.0f);
    float r = xc - n * 0.693359375f;
    r = r + n * 2.12194440e-4f;
    float p = 1.9875691500e-4f;
    p = p * r + 1.3981999507e-3f;
    p = p * r + 8.3334519073e-3f;
    p = p * r + 4.1665795894e-2f;
    p = p * r + 1.6666665459e-1f;
    p = p * r + 5.0000001201e-1f;
    p = p * r * r + r + 1.0f;
    const float scale = std::bit_cast<float>((static_cast<std::int32_t>(n) + 127) << 23);
    const float y = x < -87.3f ? 0.0f : p * scale;
    return x != x ? x : y;
  } else {
    return std::exp(x);
  }
}

/// Scalar tanh-approximate GELU, written as x * sigmoid(2u) with
/// u = sqrt(2/pi) (x + 0.044715 x^3), and its derivative.
template <typename T>
inline T gelu_scalar(T x) {
  constexpr T kAlpha = static_cast<T>(0.7978845608028654);
  constexpr T kCubic = static_cast<T>(0.044715);
  const T u = kAlpha * (x + kCubic * x * x * x);
  return x / (T(1) + fast_exp(T(-2) * u));
}

template <typename T>
inline T gelu_grad_scalar(T x) {
  constexpr T kAlpha = static_cast<T>(0.7978845608028654);
  constexpr T kCubic = static_cast<T>(0.044715);
  const T u = kAlpha * (x + kCubic * x * x * x);
  const T s = T(1) / (T(1) + fast_exp(T(-2) * u));
  return s + T(2) * x * s * (T(1) - s) * kAlpha * (T(1) + T(3) * kCubic * x * x);
}

}  // namespace minigpt::kernels
