// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma -mpopcnt. Only reached through the dispatch
// table after a CPUID check.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <array>

namespace maskforge::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  double acc = _mm_cvtsd_f64(s);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  if (i + 4 <= n) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    i += 4;
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

namespace {

// shuffle masks that gather byte 3k+c of a 48-byte block into lane k, one
// mask per (source vector, channel) combination
struct DeinterleaveMasks {
  std::array<std::array<std::array<std::uint8_t, 16>, 3>, 3> m{};
  constexpr DeinterleaveMasks() {
    for (int src = 0; src < 3; ++src)
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 16; ++k) {
          const int g = 3 * k + c;
          m[src][c][k] = (g / 16 == src) ? static_cast<std::uint8_t>(g % 16) : 0x80;
        }
  }
};
constexpr DeinterleaveMasks kMasks{};

inline __m128i flags_ge(__m128i a, __m128i b, __m128i thr) {
  const __m128i d = _mm_or_si128(_mm_subs_epu8(a, b), _mm_subs_epu8(b, a));
  return _mm_cmpeq_epi8(_mm_max_epu8(d, thr), d);
}

}  // namespace

void absdiff_threshold_rgb(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out,
                           std::size_t pixels, int threshold) {
  if (threshold <= 0 || threshold > 255) {
    scalar::absdiff_threshold_rgb(a, b, out, pixels, threshold);
    return;
  }
  const __m128i thr = _mm_set1_epi8(static_cast<char>(threshold));
  const __m128i white = _mm_set1_epi8(static_cast<char>(0xFF));
  std::size_t p = 0;
  for (; p + 16 <= pixels; p += 16) {
    const std::uint8_t* pa = a + 3 * p;
    const std::uint8_t* pb = b + 3 * p;
    __m128i f[3];
    for (int j = 0; j < 3; ++j) {
      f[j] = flags_ge(_mm_loadu_si128(reinterpret_cast<const __m128i*>(pa + 16 * j)),
                      _mm_loadu_si128(reinterpret_cast<const __m128i*>(pb + 16 * j)), thr);
    }
    __m128i acc = _mm_setzero_si128();
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c)
        acc = _mm_or_si128(
            acc, _mm_shuffle_epi8(f[j], _mm_loadu_si128(
                                            reinterpret_cast<const __m128i*>(kMasks.m[j][c].data()))));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + p), _mm_and_si128(acc, white));
  }
  if (p < pixels) scalar::absdiff_threshold_rgb(a + 3 * p, b + 3 * p, out + p, pixels - p, threshold);
}

Counts4 confusion(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i vp = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pred + i));
    const __m256i vg = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(gt + i));
    const std::uint32_t p = ~static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(vp, zero)));
    const std::uint32_t g = ~static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(vg, zero)));
    tp += static_cast<std::uint64_t>(_mm_popcnt_u32(p & g));
    fp += static_cast<std::uint64_t>(_mm_popcnt_u32(p & ~g));
    fn += static_cast<std::uint64_t>(_mm_popcnt_u32(~p & g));
  }
  Counts4 c{tp, fp, fn, static_cast<std::uint64_t>(i) - tp - fp - fn};
  if (i < n) {
    const Counts4 tail = scalar::confusion(pred + i, gt + i, n - i);
    for (int k = 0; k < 4; ++k) c[k] += tail[k];
  }
  return c;
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  std::size_t k = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const std::uint32_t z = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    k += 32 - static_cast<std::size_t>(_mm_popcnt_u32(z));
  }
  return k + scalar::count_nonzero(data + i, n - i);
}

}  // namespace maskforge::kernels::avx2
