// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_impl.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace maskforge::kernels {

namespace {

const KernelTable kScalar{Isa::scalar,
                          &scalar::dot,
                          &scalar::axpy,
                          &scalar::absdiff_threshold_rgb,
                          &scalar::confusion,
                          &scalar::count_nonzero};

#if defined(MASKFORGE_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2,
                        &avx2::dot,
                        &avx2::axpy,
                        &avx2::absdiff_threshold_rgb,
                        &avx2::confusion,
                        &avx2::count_nonzero};
#endif

bool deterministic_requested() {
  const char* v = std::getenv("MASKFORGE_DETERMINISTIC");
  return v != nullptr && std::strcmp(v, "0") != 0 && v[0] != '\0';
}

const KernelTable& select() {
  if (!deterministic_requested() && avx2_available()) return avx2_table();
  return kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool avx2_available() {
#if defined(MASKFORGE_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
         __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

const KernelTable& avx2_table() {
#if defined(MASKFORGE_HAVE_AVX2)
  if (avx2_available()) return kAvx2;
#endif
  throw std::runtime_error("AVX2 kernels unavailable on this CPU or build");
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace maskforge::kernels
