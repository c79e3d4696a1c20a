#include "gevprice/baselines.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include "gevprice/errors.hpp"
#include "gevprice/parallel.hpp"
#include "gevprice/pricing_det.hpp"

namespace gevprice {
namespace {

std::vector<double> prices_from(const ProductLine& line, const std::vector<double>& z) {
  std::vector<double> x(line.size());
  if (z.size() == 1) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = line.costs[i] + z[0];
    return x;
  }
  for (std::size_t n = 0; n < line.blocks(); ++n)
    for (std::size_t i : line.partitions[n]) x[i] = line.costs[i] + z[n];
  return x;
}

}  // namespace

std::vector<double> det_markup_for(const GevModel& model, const MixtureUncertaintySet& set,
                                   const ProductLine& line, const ChoiceParams& params) {
  if (set.mode() == SetMode::joint) return det_price_homogeneous(model, params, line.costs).markup;
  return det_price_partition(model, params, line).markup;
}

BaselineSolution det_baseline(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                              const ProductPenalty* penalty, const PenaltyOptions& popts) {
  BaselineSolution sol;
  sol.label = "DET";
  if (penalty) {
    const auto r = det_penalty_solve(model, set.mean_params(), line, PenaltySpec::from_product(line, *penalty), popts);
    sol.markup = r.markup;
    sol.violation = r.violation;
  } else {
    sol.markup = det_markup_for(model, set, line, set.mean_params());
  }
  sol.prices = prices_from(line, sol.markup);
  return sol;
}

BaselineSolution sampling_baseline(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                                   std::size_t s1, std::size_t s2, std::uint64_t seed,
                                   const ProductPenalty* penalty, const PenaltyOptions& popts) {
  if (s1 == 0 || s2 == 0) throw ConfigError("sampling baseline needs s1 >= 1 and s2 >= 1");
  const auto candidates = set.sample_many(seed, stream::kCandidates, s1);
  const auto scenarios = set.sample_many(seed, stream::kScoring, s2);

  std::optional<PenaltySpec> spec;
  if (penalty) spec = PenaltySpec::from_product(line, *penalty);
  std::vector<std::vector<double>> markups(s1);
  std::vector<double> worst(s1), viol(s1, 0.0);
  parallel_for(s1, [&](std::size_t c) {
    if (spec) {
      const auto r = det_penalty_solve(model, candidates[c].params, line, *spec, popts);
      markups[c] = r.markup;
      viol[c] = r.violation;
    } else {
      markups[c] = det_markup_for(model, set, line, candidates[c].params);
    }
    const auto x = prices_from(line, markups[c]);
    double w = std::numeric_limits<double>::infinity();
    for (const auto& sc : scenarios) {
      const double v = penalty ? penalty_profit(model, sc.params, line.costs, x, *penalty)
                               : expected_revenue(model, sc.params, line.costs, x);
      w = std::min(w, v);
    }
    worst[c] = w;
  });

  // Ties go to the lowest index, which keeps prefix-nested candidate sets comparable.
  std::size_t best = 0;
  for (std::size_t c = 1; c < s1; ++c)
    if (worst[c] > worst[best]) best = c;

  BaselineSolution sol;
  sol.label = "SA" + std::to_string(s1);
  sol.markup = markups[best];
  sol.prices = prices_from(line, sol.markup);
  sol.chosen = best;
  sol.chosen_lambda = candidates[best].lambdas;
  sol.inner_worst = worst[best];
  sol.violation = viol[best];
  sol.candidate_worst = std::move(worst);
  return sol;
}

}  // namespace gevprice
