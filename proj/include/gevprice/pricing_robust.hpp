#pragma once

// Robust pricing: maximize the worst-case expected revenue over a mixture
// uncertainty set.
//
// Homogeneous sensitivities: the optimal markup is the root of a scalar fixed
// point, found by bisection between bounds from the coordinate extremes of
// the set. Partition-wise sensitivities: the problem is recast in the
// aggregated purchase probabilities pG of the partitions, where it is a
// smooth concave program solved by projected gradient ascent.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gevprice/adversary.hpp"
#include "gevprice/gev.hpp"
#include "gevprice/uncertainty.hpp"

namespace gevprice {

struct RobustDiagnostics {
  double fixed_point_residual = 0.0;
  double z_lo = 0.0, z_hi = 0.0;  // homogeneous mode
  double gradient_norm = 0.0;     // partition mode
  int iterations = 0;
};

struct RobustSolution {
  std::vector<double> markup;  // one entry, or one per partition
  std::vector<double> prices;
  ChoiceParams worst_params;
  double worst_case_revenue = 0.0;
  std::vector<double> pG;  // partition mode
  RobustDiagnostics diagnostics;
};

std::pair<double, double> bracket_homogeneous(const GevModel& model, const MixtureUncertaintySet& set,
                                              std::span<const double> costs);

/// f(z) = z - (1 + W(G(Y|0, a*(z), b*(z)) / e)) / b*(z), with (a*, b*) the adversary's response to z.
double homogeneous_residual(AdversarySession& session, double z);

RobustSolution robust_price_homogeneous(const GevModel& model, const MixtureUncertaintySet& set,
                                        std::span<const double> costs);

/// The reduced program in pG. The set's blocks must coincide with the partitions.
class ReducedProgram {
 public:
  ReducedProgram(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line);

  std::size_t N() const noexcept { return line_.blocks(); }
  const ProductLine& line() const noexcept { return line_; }
  AdversarySession& session() noexcept { return session_; }

  struct Eval {
    double W = 0.0;
    std::vector<double> grad, z, b_star, g_under;
  };

  /// Throws DomainError unless pG_n > 0 and sum pG < 1.
  Eval evaluate(std::span<const double> pG);
  std::vector<double> z_of_p(std::span<const double> pG);

  /// Aggregated purchase probabilities at markups z under the minimized CPGFs.
  std::vector<double> p_of_z(std::span<const double> z);

 private:
  ProductLine line_;
  AdversarySession session_;
};

std::vector<double> z_of_p(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                           std::span<const double> pG);
std::pair<double, std::vector<double>> reduced_objective_and_grad(const GevModel& model,
                                                                  const MixtureUncertaintySet& set,
                                                                  const ProductLine& line,
                                                                  std::span<const double> pG);

struct PartitionOptions {
  double tol = 1e-7;
  int max_iter = 50000;
  double margin = 1e-9;
  std::optional<std::vector<double>> start;
};

/// Projection onto { p >= margin, sum p <= 1 - margin }.
std::vector<double> project_probabilities(std::span<const double> v, double margin);

RobustSolution robust_price_partition(const GevModel& model, const MixtureUncertaintySet& set,
                                      const ProductLine& line, const PartitionOptions& opts = {});

struct AdversaryValue {
  double value = 0.0;
  std::vector<int> config;  // 1 where the maximized CPGF is used
};

/// Exact worst-case revenue of the partition-constant markups z.
AdversaryValue adversary_markup_value(const GevModel& model, const MixtureUncertaintySet& set,
                                      const ProductLine& line, std::span<const double> z);

struct SampledSummary {
  double worst = 0.0, average = 0.0, max = 0.0;
  std::vector<double> revenues;
};

SampledSummary summarize(std::vector<double> revenues);

/// Revenue of the prices under each scenario, evaluated in parallel.
std::vector<double> scenario_revenues(const GevModel& model, const std::vector<SetSample>& scenarios,
                                      std::span<const double> costs, std::span<const double> prices);

/// Draws n_samples scenarios (sample i from derive_seed(seed, stream::kEvaluation, i)).
SampledSummary sampled_worst_case(const GevModel& model, const MixtureUncertaintySet& set,
                                  std::span<const double> prices, std::span<const double> costs,
                                  std::size_t n_samples, std::uint64_t seed);

}  // namespace gevprice
