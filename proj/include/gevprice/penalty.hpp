#pragma once

// Robust pricing with hinge penalties on expected sales. Constraints act on
// the aggregated partition probabilities, d_t . pG <= r_t, and violations
// cost lambda_t per unit:
//   H(pG) = W(pG) - sum_t lambda_t max(0, d_t . pG - r_t).

#include <cstddef>
#include <span>
#include <vector>

#include "gevprice/gev.hpp"
#include "gevprice/pricing_robust.hpp"
#include "gevprice/uncertainty.hpp"

namespace gevprice {

/// Product-level constraints alpha_t . P <= r_t on product purchase probabilities.
struct ProductPenalty {
  std::vector<std::vector<double>> alpha;
  std::vector<double> r;
  std::vector<double> lambda;

  std::size_t T() const noexcept { return r.size(); }
};

/// Partition-level form used by the solvers.
struct PenaltySpec {
  std::vector<std::vector<double>> d;
  std::vector<double> r;
  std::vector<double> lambda;

  std::size_t T() const noexcept { return r.size(); }
  void validate(std::size_t N) const;

  /// Requires alpha_t to be constant on every partition.
  static PenaltySpec from_product(const ProductLine& line, const ProductPenalty& pen);
};

double penalty_violation(std::span<const double> pG, const PenaltySpec& spec);
/// sum_t lambda_t max(0, d_t . pG - r_t).
double penalty_cost(std::span<const double> pG, const PenaltySpec& spec);

struct PenaltyOptions {
  int subgradient_iters = 2000;
  double subgradient_scale = 0.1;
  double tol = 1e-7;
  int max_iter = 50000;
  double margin = 1e-9;
};

struct PenaltySolution {
  std::vector<double> pG, markup, prices;
  double H = 0.0;
  double W = 0.0;
  double violation = 0.0;
  int iterations = 0;
};

PenaltySolution robust_penalty_solve(const GevModel& model, const MixtureUncertaintySet& set,
                                     const ProductLine& line, const PenaltySpec& spec,
                                     const PenaltyOptions& opts = {});

/// Known parameters: the robust solver on a one-point set.
PenaltySolution det_penalty_solve(const GevModel& model, const ChoiceParams& params, const ProductLine& line,
                                  const PenaltySpec& spec, const PenaltyOptions& opts = {});

struct ConstrainedSolution {
  std::vector<double> pG, markup;
  double value = 0.0;
};

/// max W(pG) subject to d_t . pG <= r_t for every t.
ConstrainedSolution constrained_reference_solve(const GevModel& model, const MixtureUncertaintySet& set,
                                                const ProductLine& line,
                                                const std::vector<std::vector<double>>& d,
                                                const std::vector<double>& r, const PenaltyOptions& opts = {});

struct SweepRow {
  double lambda = 0.0;
  double H = 0.0;
  double violation = 0.0;
};

struct SweepReport {
  double delta_star = 0.0;  // unconstrained robust optimum
  double phi_bar = 0.0;     // constrained optimum
  double lambda_threshold = 0.0;
  std::vector<SweepRow> rows;
  bool violation_monotone = true;
  bool threshold_respected = true;
};

/// Solves for every lambda on the grid (applied to all constraints) and checks
/// that violation is non-increasing and at most epsilon once
/// lambda >= (delta_star - phi_bar) / epsilon.
SweepReport lambda_sweep_convergence(const GevModel& model, const MixtureUncertaintySet& set,
                                     const ProductLine& line, const PenaltySpec& spec,
                                     const std::vector<double>& lambda_grid, double epsilon,
                                     const PenaltyOptions& opts = {});

/// Expected revenue minus product-level penalties for concrete parameters and prices.
double penalty_profit(const GevModel& model, const ChoiceParams& params, std::span<const double> costs,
                      std::span<const double> prices, const ProductPenalty& pen);

}  // namespace gevprice
