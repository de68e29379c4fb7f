// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "maskforge/kernels.hpp"

namespace maskforge::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void absdiff_threshold_rgb(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out,
                           std::size_t pixels, int threshold);
Counts4 confusion(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n);
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);
}  // namespace scalar

#if defined(MASKFORGE_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void absdiff_threshold_rgb(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out,
                           std::size_t pixels, int threshold);
Counts4 confusion(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n);
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n);
}  // namespace avx2
#endif

}  // namespace maskforge::kernels
