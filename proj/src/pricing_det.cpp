#include "gevprice/pricing_det.hpp"

#include <algorithm>
#include <cmath>

#include "gevprice/errors.hpp"
#include "gevprice/lambertw.hpp"

namespace gevprice {
namespace {

double log_g_at_cost(const GevModel& model, const ChoiceParams& params, std::span<const double> costs,
                     std::span<const std::size_t> items) {
  std::vector<double> ly(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    const std::size_t i = items[j];
    ly[j] = params.a[i] - params.b[i] * costs[i];
  }
  return model.log_value(ly);
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> revenue_gradient_fd(const GevModel& model, const ChoiceParams& params,
                                        std::span<const double> costs, std::span<const double> prices) {
  std::vector<double> x(prices.begin(), prices.end()), g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = expected_revenue(model, params, costs, x);
    x[i] = xi - h;
    const double fm = expected_revenue(model, params, costs, x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

DetSolution det_price_homogeneous(const GevModel& model, const ChoiceParams& params, std::span<const double> costs) {
  const std::size_t m = model.size();
  params.validate(m);
  if (costs.size() != m) throw ConfigError("cost vector has the wrong length");
  if (!params.homogeneous()) throw ConfigError("closed-form pricing needs equal price sensitivities");
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  const double b = params.b.front();
  const double log_gamma = log_g_at_cost(model, params, costs, all);
  DetSolution sol;
  sol.revenue = lambert_w0_exp(log_gamma - 1.0) / b;
  const double z = 1.0 / b + sol.revenue;
  sol.markup = {z};
  sol.prices.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.prices[i] = costs[i] + z;
  sol.stationarity = inf_norm(revenue_gradient_fd(model, params, costs, sol.prices));
  if (sol.stationarity > 1e-5 * (1.0 + sol.revenue))
    throw NumericError("closed-form prices fail the stationarity check");
  return sol;
}

DetSolution det_price_partition(const GevModel& model, const ChoiceParams& params, const ProductLine& line) {
  line.validate();
  const std::size_t m = line.size(), N = line.blocks();
  if (model.size() != m) throw ConfigError("model and product line disagree on the product count");
  params.validate(m);
  if (!params.partition_homogeneous(line.partitions))
    throw ConfigError("price sensitivities must be constant on each partition");
  if (!model.separable_over(line.partitions)) throw ConfigError("model is not separable over the partitions");

  std::vector<double> bn(N), log_g0(N);
  double b_min = params.b[line.partitions[0][0]];
  for (std::size_t n = 0; n < N; ++n) {
    const auto& items = line.partitions[n];
    bn[n] = params.b[items.front()];
    b_min = std::min(b_min, bn[n]);
    log_g0[n] = log_g_at_cost(model.restrict(items), params, line.costs, items);
  }
  // r(R) = R - sum_n (1/b_n) exp(-(b_n R + 1)) G^n(0) is strictly increasing.
  auto resid = [&](double R) {
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n) s += std::exp(log_g0[n] - bn[n] * R - 1.0 - std::log(bn[n]));
    return R - s;
  };
  double log_gtot = log_g0[0];
  for (std::size_t n = 1; n < N; ++n) {
    const double hi = std::max(log_gtot, log_g0[n]), lo = std::min(log_gtot, log_g0[n]);
    log_gtot = hi + std::log1p(std::exp(lo - hi));
  }
  double lo = 0.0, hi = (1.0 + lambert_w0_exp(log_gtot - 1.0)) / b_min;
  for (int d = 0; resid(hi) < 0.0; ++d) {
    if (d >= 200) throw NumericError("could not bracket the deterministic fixed point");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (resid(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double R = 0.5 * (lo + hi);

  DetSolution sol;
  sol.revenue = R;
  sol.fixed_point_residual = std::abs(resid(R));
  if (sol.fixed_point_residual > 1e-10) throw NumericError("deterministic fixed point residual too large");
  sol.markup.resize(N);
  sol.prices.resize(m);
  for (std::size_t n = 0; n < N; ++n) {
    sol.markup[n] = 1.0 / bn[n] + R;
    for (std::size_t i : line.partitions[n]) sol.prices[i] = line.costs[i] + sol.markup[n];
  }
  sol.stationarity = inf_norm(revenue_gradient_fd(model, params, line.costs, sol.prices));
  if (sol.stationarity > 1e-5 * (1.0 + R)) throw NumericError("partition prices fail the stationarity check");
  return sol;
}

}  // namespace gevprice
