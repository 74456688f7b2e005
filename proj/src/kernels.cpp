#include "minigpt/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace minigpt::kernels {
namespace {

// Below this many multiply-adds a gemm runs on the calling thread.
constexpr std::size_t kParallelGemmWork = 1 << 15;
constexpr std::size_t kParallelRowWork = 1 << 14;

// Register tile of the gemm micro-kernel and the depth of one packed slice.
constexpr std::size_t kMR = 6;
constexpr std::size_t kNR = 32;
constexpr std::size_t kKC = 256;

int g_threads = 0;

int active_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

// op(B) as column panels of width kNR: panel jp holds rows p = 0..k-1 of
// columns [jp*kNR, jp*kNR + kNR), zero padded on the right.
template <typename T>
void pack_b(bool trans_b, std::size_t n, std::size_t k, const T* b, T* out) {
  const std::size_t panels = (n + kNR - 1) / kNR;
  for (std::size_t jp = 0; jp < panels; ++jp) {
    const std::size_t j0 = jp * kNR, jn = std::min(kNR, n - j0);
    T* dst = out + jp * k * kNR;
    for (std::size_t p = 0; p < k; ++p) {
      T* row = dst + p * kNR;
      if (trans_b)
        for (std::size_t j = 0; j < jn; ++j) row[j] = b[(j0 + j) * k + p];
      else
        for (std::size_t j = 0; j < jn; ++j) row[j] = b[p * n + j0 + j];
      std::fill(row + jn, row + kNR, T(0));
    }
  }
}

// Rows [i0, i0+rows) and depth [p0, p0+kc) of op(A), interleaved as [p][kMR].
template <typename T>
void pack_a(bool trans_a, std::size_t m, std::size_t k, const T* a, std::size_t i0, std::size_t rows,
            std::size_t p0, std::size_t kc, T* out) {
  for (std::size_t p = 0; p < kc; ++p) {
    T* dst = out + p * kMR;
    for (std::size_t r = 0; r < rows; ++r) dst[r] = trans_a ? a[(p0 + p) * m + i0 + r] : a[(i0 + r) * k + p0 + p];
    std::fill(dst + rows, dst + kMR, T(0));
  }
}

template <typename T>
void micro_kernel(std::size_t kc, const T* __restrict ap, const T* __restrict bp, T* __restrict out) {
  T acc[kMR][kNR] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const T* __restrict br = bp + p * kNR;
    const T* __restrict ar = ap + p * kMR;
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMR; ++r) {
      const T av = ar[r];
#pragma omp simd
      for (std::size_t j = 0; j < kNR; ++j) acc[r][j] += av * br[j];
    }
  }
  std::copy(&acc[0][0], &acc[0][0] + kMR * kNR, out);
}

// Depth slice [p0, p0+kc) of one kMR-row panel of C, added into C.
template <typename T>
void gemm_panel_slice(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* bp, T* c,
                      std::size_t i0, std::size_t p0, std::size_t kc) {
  const std::size_t rows = std::min(kMR, m - i0);
  const std::size_t panels = (n + kNR - 1) / kNR;
  alignas(64) T apack[kKC * kMR];
  alignas(64) T tile[kMR * kNR];
  pack_a(trans_a, m, k, a, i0, rows, p0, kc, apack);
  for (std::size_t jp = 0; jp < panels; ++jp) {
    const std::size_t j0 = jp * kNR, jn = std::min(kNR, n - j0);
    micro_kernel(kc, apack, bp + jp * k * kNR + p0 * kNR, tile);
    for (std::size_t r = 0; r < rows; ++r) {
      T* cr = c + (i0 + r) * n + j0;
      const T* tr = tile + r * kNR;
      for (std::size_t j = 0; j < jn; ++j) cr[j] += tr[j];
    }
  }
}

}  // namespace

void set_num_threads(int threads) { g_threads = threads; }
int num_threads() { return active_threads(); }

template <typename T>
void gemm(bool trans_a, bool trans_b, const GemmShape& s, const T* a, std::size_t a_stride, const T* b,
          std::size_t b_stride, T* c, bool accumulate) {
  if (s.batch == 0 || s.m == 0 || s.n == 0) return;
  const std::size_t c_stride = s.m * s.n;
  const int threads = active_threads();
  if (!accumulate) std::fill(c, c + s.batch * c_stride, T(0));
  if (s.k == 0) return;

  const std::size_t b_count = b_stride == 0 ? 1 : s.batch;
  const std::size_t packed_size = ((s.n + kNR - 1) / kNR) * s.k * kNR;
  std::vector<T> packed(b_count * packed_size);
#pragma omp parallel for schedule(static) num_threads(threads) if (b_count > 1 && b_count * packed_size > kParallelRowWork)
  for (std::size_t bi = 0; bi < b_count; ++bi) pack_b(trans_b, s.n, s.k, b + bi * b_stride, packed.data() + bi * packed_size);
  const std::size_t bp_stride = b_stride == 0 ? 0 : packed_size;

  // Each thread owns a contiguous run of row panels and sweeps it once per
  // depth slice, so a slice of packed B stays cached across the run. Every C
  // element still sums its slices in ascending order whatever the split.
  const std::size_t tiles = (s.m + kMR - 1) / kMR;
  const std::size_t items = s.batch * tiles;
  const int team = s.batch * s.m * s.n * s.k >= kParallelGemmWork ? threads : 1;
#pragma omp parallel num_threads(team)
  {
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t t = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = items * t / nt, hi = items * (t + 1) / nt;
    for (std::size_t p0 = 0; p0 < s.k; p0 += kKC) {
      const std::size_t kc = std::min(kKC, s.k - p0);
      for (std::size_t item = lo; item < hi; ++item) {
        const std::size_t bi = item / tiles;
        gemm_panel_slice(trans_a, s.m, s.n, s.k, a + bi * a_stride, packed.data() + bi * bp_stride,
                         c + bi * c_stride, (item % tiles) * kMR, p0, kc);
      }
    }
  }
}

template <typename T>
bool softmax_rows(std::size_t rows, std::size_t n, const T* x, T* y) {
  bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok) num_threads(active_threads()) if (rows * n >= kParallelRowWork)
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * n;
    T* yr = y + r * n;
    const T mx = *std::max_element(xr, xr + n);
    if (mx == -std::numeric_limits<T>::infinity()) {
      std::fill(yr, yr + n, std::numeric_limits<T>::quiet_NaN());
      ok = false;
      continue;
    }
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) yr[j] = fast_exp(xr[j] - mx);
    T sum = 0;
    for (std::size_t j = 0; j < n; ++j) sum += yr[j];
    const T inv = T(1) / sum;
    for (std::size_t j = 0; j < n; ++j) yr[j] *= inv;
  }
  return ok;
}

template <typename T>
void layer_norm_rows(std::size_t rows, std::size_t d, const T* x, const T* gain, const T* bias, T eps, T* y,
                     T* mean, T* rstd) {
#pragma omp parallel for schedule(static) num_threads(active_threads()) if (rows * d >= kParallelRowWork)
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * d;
    T* yr = y + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) yr[j] = (xr[j] - mu) * rs * gain[j] + bias[j];
    mean[r] = mu;
    rstd[r] = rs;
  }
}

template <typename T>
void gelu(std::size_t n, const T* x, T* y) {
#pragma omp parallel for simd schedule(static) num_threads(active_threads()) if (n >= kParallelRowWork)
  for (std::size_t i = 0; i < n; ++i) y[i] = gelu_scalar(x[i]);
}

template <typename T>
void gelu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
#pragma omp parallel for simd schedule(static) num_threads(active_threads()) if (n >= kParallelRowWork)
  for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * gelu_grad_scalar(x[i]);
}

namespace reference {

template <typename T>
void gemm(bool trans_a, bool trans_b, const GemmShape& s, const T* a, std::size_t a_stride, const T* b,
          std::size_t b_stride, T* c, bool accumulate) {
  for (std::size_t bi = 0; bi < s.batch; ++bi) {
    const T* ab = a + bi * a_stride;
    const T* bb = b + bi * b_stride;
    T* cb = c + bi * s.m * s.n;
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        T acc = accumulate ? cb[i * s.n + j] : T(0);
        for (std::size_t p = 0; p < s.k; ++p) {
          const T av = trans_a ? ab[p * s.m + i] : ab[i * s.k + p];
          const T bv = trans_b ? bb[j * s.k + p] : bb[p * s.n + j];
          acc += av * bv;
        }
        cb[i * s.n + j] = acc;
      }
    }
  }
}

template <typename T>
bool softmax_rows(std::size_t rows, std::size_t n, const T* x, T* y) {
  bool ok = true;
  for (std::size_t r = 0; r < rows; ++r) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[r * n + j]);
    if (mx == -std::numeric_limits<T>::infinity()) {
      for (std::size_t j = 0; j < n; ++j) y[r * n + j] = std::numeric_limits<T>::quiet_NaN();
      ok = false;
      continue;
    }
    T sum = 0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(x[r * n + j] - mx);
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] = std::exp(x[r * n + j] - mx) / sum;
  }
  return ok;
}

template <typename T>
void layer_norm_rows(std::size_t rows, std::size_t d, const T* x, const T* gain, const T* bias, T eps, T* y,
                     T* mean, T* rstd) {
  for (std::size_t r = 0; r < rows; ++r) {
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += x[r * d + j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (x[r * d + j] - mu) * (x[r * d + j] - mu);
    var /= static_cast<T>(d);
    mean[r] = mu;
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = (x[r * d + j] - mu) / std::sqrt(var + eps) * gain[j] + bias[j];
  }
}

template <typename T>
void gelu(std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    y[i] = T(0.5) * v * (T(1) + std::tanh(std::sqrt(T(2) / std::numbers::pi_v<T>) * (v + T(0.044715) * v * v * v)));
  }
}

template <typename T>
void gelu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
  const T alpha = std::sqrt(T(2) / std::numbers::pi_v<T>);
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    const T t = std::tanh(alpha * (v + T(0.044715) * v * v * v));
    const T d = T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * alpha * (T(1) + T(3) * T(0.044715) * v * v);
    dx[i] += dy[i] * d;
  }
}

}  // namespace reference

#define MINIGPT_INSTANTIATE_KERNELS(T)                                                                  \
  template void gemm<T>(bool, bool, const GemmShape&, const T*, std::size_t, const T*, std::size_t, T*, \
                        bool);                                                                        \
  template bool softmax_rows<T>(std::size_t, std::size_t, const T*, T*);                              \
  template void layer_norm_rows<T>(std::size_t, std::size_t, const T*, const T*, const T*, T, T*, T*, T*); \
  template void gelu<T>(std::size_t, const T*, T*);                                                   \
  template void gelu_backward<T>(std::size_t, const T*, const T*, T*);                                \
  template void reference::gemm<T>(bool, bool, const GemmShape&, const T*, std::size_t, const T*,      \
                                   std::size_t, T*, bool);                                            \
  template bool reference::softmax_rows<T>(std::size_t, std::size_t, const T*, T*);                   \
  template void reference::layer_norm_rows<T>(std::size_t, std::size_t, const T*, const T*, const T*, T, \
                                              T*, T*, T*);                                            \
  template void reference::gelu<T>(std::size_t, const T*, T*);                                        \
  template void reference::gelu_backward<T>(std::size_t, const T*, const T*, T*);

MINIGPT_INSTANTIATE_KERNELS(float)
MINIGPT_INSTANTIATE_KERNELS(double)

#undef MINIGPT_INSTANTIATE_KERNELS

}  // namespace minigpt::kernels
