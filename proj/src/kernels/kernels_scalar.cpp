#include <cmath>
#include <limits>

#include "gevprice/kernels.hpp"
#include "kernels_internal.hpp"

namespace gevprice::kernels::scalar {

double max_value(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = x > m ? x : m;
  return m;
}

double sum_exp_shifted(std::span<const double> v, double shift) {
  double s = 0.0;
  for (double x : v) s += std::exp(x - shift);
  return s;
}

void exp_shifted(std::span<const double> v, double shift, std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - shift);
}

void scale_offset(std::span<const double> v, std::span<const double> offset, double scale,
                  std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * (v[i] + offset[i]);
}

void affine_utility(std::span<const double> a, std::span<const double> b,
                    std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i] * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace gevprice::kernels::scalar

namespace gevprice::kernels {

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{
      "scalar",           scalar::max_value,      scalar::sum_exp_shifted, scalar::exp_shifted,
      scalar::scale_offset, scalar::affine_utility, scalar::dot,             scalar::axpy,
  };
  return table;
}

}  // namespace gevprice::kernels
