#include "gevprice/lambertw.hpp"

#include <cmath>

#include "gevprice/errors.hpp"

namespace gevprice {
namespace {

constexpr double kInvE = 0.36787944117144232160;

// Halley refinement of w e^w = x.
double halley(double x, double w) {
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

// Newton on w + log w = log_x; the function is increasing for w > 0.
double from_log(double log_x) {
  double w = log_x - std::log(log_x);
  for (int it = 0; it < 50; ++it) {
    const double f = w + std::log(w) - log_x;
    const double step = f / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 1e-16 * w) break;
  }
  return w;
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
  if (x < -kInvE) {
    // Allow the last ulp of rounding around -1/e.
    if (x < -kInvE * (1.0 + 4e-16)) throw DomainError("lambert_w0: argument below -1/e");
    return -1.0;
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x > 1e300) return from_log(std::log(x));
  double w0;
  if (x < 0.0) {
    const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    w0 = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w0 = std::log1p(x);
    if (x > 3.0) w0 -= std::log(w0);
  }
  return halley(x, w0);
}

double lambert_w0_exp(double log_x) {
  if (std::isnan(log_x)) throw DomainError("lambert_w0_exp: NaN argument");
  if (log_x < 690.0) return lambert_w0(std::exp(log_x));
  return from_log(log_x);
}

}  // namespace gevprice
