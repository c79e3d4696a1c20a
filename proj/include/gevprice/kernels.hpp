#pragma once

// Data-parallel inner loops used by the choice-model evaluator.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at first use from the CPU
// feature flags; GEVPRICE_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace gevprice::kernels {

struct KernelTable {
  std::string_view name;

  /// max_i v_i; -inf for an empty span.
  double (*max_value)(std::span<const double> v);

  /// sum_i exp(v_i - shift).
  double (*sum_exp_shifted)(std::span<const double> v, double shift);

  /// out_i = exp(v_i - shift).
  void (*exp_shifted)(std::span<const double> v, double shift, std::span<double> out);

  /// out_i = scale * (v_i + offset_i).
  void (*scale_offset)(std::span<const double> v, std::span<const double> offset, double scale,
                       std::span<double> out);

  /// out_i = a_i - b_i * x_i.
  void (*affine_utility)(std::span<const double> a, std::span<const double> b,
                         std::span<const double> x, std::span<double> out);

  /// sum_i x_i * y_i.
  double (*dot)(std::span<const double> x, std::span<const double> y);

  /// y_i += alpha * x_i.
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

}  // namespace gevprice::kernels
