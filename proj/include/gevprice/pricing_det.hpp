#pragma once

// Deterministic pricing with known choice parameters: the constant-markup
// closed form for equal price sensitivities and the one-dimensional fixed
// point for sensitivities that are constant on each partition.

#include <span>
#include <vector>

#include "gevprice/gev.hpp"

namespace gevprice {

struct DetSolution {
  std::vector<double> markup;  // one entry per partition (one for the closed form)
  std::vector<double> prices;
  double revenue = 0.0;
  double fixed_point_residual = 0.0;
  double stationarity = 0.0;  // infinity norm of the finite-difference revenue gradient
};

DetSolution det_price_homogeneous(const GevModel& model, const ChoiceParams& params, std::span<const double> costs);

DetSolution det_price_partition(const GevModel& model, const ChoiceParams& params, const ProductLine& line);

/// Central finite-difference gradient of expected revenue in the prices.
std::vector<double> revenue_gradient_fd(const GevModel& model, const ChoiceParams& params,
                                        std::span<const double> costs, std::span<const double> prices);

}  // namespace gevprice
