#pragma once

#include <span>

namespace gevprice::kernels::scalar {

double max_value(std::span<const double> v);
double sum_exp_shifted(std::span<const double> v, double shift);
void exp_shifted(std::span<const double> v, double shift, std::span<double> out);
void scale_offset(std::span<const double> v, std::span<const double> offset, double scale,
                  std::span<double> out);
void affine_utility(std::span<const double> a, std::span<const double> b,
                    std::span<const double> x, std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace gevprice::kernels::scalar

namespace gevprice::kernels {

struct KernelTable;

// Defined only when GEVPRICE_HAVE_AVX2 is set and the AVX2 unit is compiled in.
const KernelTable& avx2_table_unchecked() noexcept;

}  // namespace gevprice::kernels
