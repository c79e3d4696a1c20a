#pragma once

// Comparison strategies: DET prices at the nominal mixture and SA, which
// prices at sampled parameters and keeps the candidate with the best sampled
// worst case.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gevprice/gev.hpp"
#include "gevprice/penalty.hpp"
#include "gevprice/uncertainty.hpp"

namespace gevprice {

struct BaselineSolution {
  std::string label;
  std::vector<double> markup;
  std::vector<double> prices;
  // SA only.
  std::size_t chosen = 0;
  std::vector<std::vector<double>> chosen_lambda;
  double inner_worst = 0.0;
  std::vector<double> candidate_worst;
  /// Penalty mode: expected-sale violation of the solve at its own parameters.
  double violation = 0.0;
};

/// Deterministic prices for the given parameters: the closed form for a joint
/// set, the partition fixed point otherwise.
std::vector<double> det_markup_for(const GevModel& model, const MixtureUncertaintySet& set,
                                   const ProductLine& line, const ChoiceParams& params);

/// With a penalty, solves the deterministic penalty problem at the nominal mixture.
BaselineSolution det_baseline(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                              const ProductPenalty* penalty = nullptr,
                              const PenaltyOptions& popts = {});

/// Candidate i comes from derive_seed(seed, stream::kCandidates, i), so the
/// candidates for a smaller s1 are a prefix of those for a larger one. All
/// candidates are scored on the same s2 scenarios drawn from stream::kScoring.
/// With a penalty, candidates solve the deterministic penalty problem and are
/// scored by penalty_profit.
BaselineSolution sampling_baseline(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                                   std::size_t s1, std::size_t s2, std::uint64_t seed,
                                   const ProductPenalty* penalty = nullptr,
                                   const PenaltyOptions& popts = {});

}  // namespace gevprice
