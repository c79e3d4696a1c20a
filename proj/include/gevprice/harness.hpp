#pragma once

// Instances, experiment drivers and file formats.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gevprice/gev.hpp"
#include "gevprice/penalty.hpp"
#include "gevprice/pricing_robust.hpp"
#include "gevprice/uncertainty.hpp"

namespace gevprice {

struct Instance {
  std::uint64_t seed = 0;
  ProductLine line;
  GevModel model = GevModel::mnl(1);
  MixtureUncertaintySet set{{ChoiceParams{{0.0}, {1.0}}}, {1.0}, 0.0, SetMode::joint};
  std::optional<ProductPenalty> penalty;

  /// Throws ConfigError when model, set, line and penalty are inconsistent.
  void validate() const;
};

struct GenerateOptions {
  std::uint64_t seed = 1;
  std::size_t m = 50, K = 5, N = 5;
  std::size_t nests = 0;  // 0: one nest per partition
  bool nested = true;
  double eps = 0.1;
  bool penalty = false;
};

/// Costs ~ U[0.5, 2], intercepts ~ U[0, 2], one sensitivity per partition and
/// anchor ~ U[0.5, 2], nest scales ~ U[1, 2], tau ~ Dirichlet(1). Partitions
/// and nests are equal contiguous blocks. N = 1 gives a joint set.
Instance generate_instance(const GenerateOptions& opts);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const RobustSolution& sol);
nlohmann::json solution_to_json(const PenaltySolution& sol);

/// Fraction of revenues strictly below the threshold.
double percentile_rank(std::span<const double> revenues, double threshold);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct MethodRow {
  std::string method;
  bool ok = true;
  std::string error;
  std::vector<double> markup;
  double average = 0.0, worst = 0.0, max = 0.0;
  double percentile_rank = 0.0;
  double violation = 0.0;
  std::vector<double> revenues;
  Histogram hist;
};

struct EvaluationReport {
  double eps = 0.0;
  double lambda = 0.0;  // penalty runs
  std::vector<MethodRow> rows;
};

struct ComparisonOptions {
  std::vector<std::size_t> s1 = {10, 50};
  std::size_t s2 = 1000;
  std::size_t n_eval = 1000;
  std::uint64_t seed = 1;
  std::size_t bins = 40;
  PenaltyOptions penalty;
};

/// RO, DET and SA(s1) for every eps, all scored on one shared scenario set per eps.
std::vector<EvaluationReport> run_comparison(const Instance& inst, const std::vector<double>& eps_grid,
                                             const ComparisonOptions& opts);

/// As run_comparison, scoring penalty_profit, once per lambda (applied to every constraint).
std::vector<EvaluationReport> run_penalty_comparison(const Instance& inst, const std::vector<double>& lambda_grid,
                                                     const std::vector<double>& eps_grid,
                                                     const ComparisonOptions& opts);

/// eps,method,average,worst,max,percentile_rank_vs_ro_worst
std::string comparison_csv(const std::vector<EvaluationReport>& reports);
/// lambda,eps,method,average,worst,max,percentile_rank_vs_ro_worst,violation
std::string penalty_csv(const std::vector<EvaluationReport>& reports);
nlohmann::json histograms_json(const std::vector<EvaluationReport>& reports);

/// LO:HI:STEP, inclusive of HI up to rounding.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gevprice
