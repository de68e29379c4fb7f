// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

// Inner-loop kernels. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant. The variant is chosen once at first use from
// CPUID; MASKFORGE_DETERMINISTIC=1 pins the scalar set so results are
// reproducible across machines.

namespace maskforge::kernels {

enum class Isa { scalar, avx2 };

/// Confusion counts in order {tp, fp, fn, tn}; white (nonzero) is positive.
using Counts4 = std::array<std::uint64_t, 4>;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[p] = 255 iff max_c |a[3p+c] - b[3p+c]| >= threshold, else 0
  void (*absdiff_threshold_rgb)(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out,
                                std::size_t pixels, int threshold);
  Counts4 (*confusion)(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n);
  std::size_t (*count_nonzero)(const std::uint8_t* data, std::size_t n);
};

const KernelTable& scalar_table();
/// Throws std::runtime_error when the CPU or build lacks AVX2/FMA.
const KernelTable& avx2_table();
bool avx2_available();

/// Table in use for this process.
const KernelTable& active();
std::string_view isa_name(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }

}  // namespace maskforge::kernels
