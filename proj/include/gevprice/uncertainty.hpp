#pragma once

// Mixture uncertainty sets: parameters are convex combinations of K anchor
// parameter vectors with weights lambda in
//   { lambda : sum lambda = 1, max(0, tau_k - eps) <= lambda_k <= min(1, tau_k + eps) }.
// In partition mode every partition carries its own independent lambda.

#include <cstddef>
#include <span>
#include <vector>

#include "gevprice/gev.hpp"
#include "gevprice/rng.hpp"

namespace gevprice {

enum class SetMode { joint, partition };

struct ParamBounds {
  std::vector<double> a_lo, a_hi, b_lo, b_hi;
};

struct SetSample {
  std::vector<std::vector<double>> lambdas;  // one per block
  ChoiceParams params;
};

class MixtureUncertaintySet {
 public:
  /// Joint mode requires every anchor to have equal b across all products;
  /// partition mode requires equal b within each part.
  MixtureUncertaintySet(std::vector<ChoiceParams> anchors, std::vector<double> tau, double eps,
                        SetMode mode, Partition parts = {});

  std::size_t K() const noexcept { return anchors_.size(); }
  std::size_t size() const noexcept { return m_; }
  double eps() const noexcept { return eps_; }
  SetMode mode() const noexcept { return mode_; }
  const std::vector<double>& tau() const noexcept { return tau_; }
  const std::vector<ChoiceParams>& anchors() const noexcept { return anchors_; }

  /// Joint mode has a single block holding every product.
  std::size_t blocks() const noexcept { return blocks_.size(); }
  const Partition& block_items() const noexcept { return blocks_; }

  std::span<const double> lambda_lo() const noexcept { return lo_; }
  std::span<const double> lambda_hi() const noexcept { return hi_; }

  /// Copy with a different radius.
  MixtureUncertaintySet with_eps(double eps) const;
  /// Same anchors and tau as a joint set, or split into partition blocks.
  MixtureUncertaintySet with_mode(SetMode mode, Partition parts = {}) const;

  bool feasible(std::span<const double> lambda, double tol = 1e-12) const;

  /// The same lambda in every block.
  ChoiceParams params_at(std::span<const double> lambda) const;
  /// Independent lambda per block.
  ChoiceParams params_at_blocks(const std::vector<std::vector<double>>& lambdas) const;
  ChoiceParams mean_params() const { return params_at(tau_); }

  /// Exact coordinatewise extremes of the parameters over the feasible set.
  ParamBounds bounds() const;

  /// Euclidean projection onto the lambda polytope.
  std::vector<double> project(std::span<const double> v) const;

  /// Vertices of the lambda polytope, deduplicated. Throws ConfigError for K > 12.
  const std::vector<std::vector<double>>& vertices() const;

  /// One approximately uniform draw (hit-and-run started at tau).
  std::vector<double> sample_lambda(Rng& rng) const;
  SetSample sample(Rng& rng) const;
  /// n draws, draw i seeded by derive_seed(seed, stream, i).
  std::vector<SetSample> sample_many(std::uint64_t seed, std::uint64_t stream, std::size_t n) const;

 private:
  std::vector<ChoiceParams> anchors_;
  std::vector<double> tau_;
  double eps_;
  SetMode mode_;
  std::size_t m_ = 0;
  Partition blocks_;
  std::vector<double> lo_, hi_;
  std::vector<std::vector<double>> vertices_;
};

}  // namespace gevprice
