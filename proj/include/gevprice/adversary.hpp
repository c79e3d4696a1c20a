#pragma once

// Inner problems of the robust pricing game: for a markup z on block n, the
// extremes of G^n(Y(z, a, b)) over the uncertainty set, and the inverse of the
// minimized function z -> min G^n.
//
// The minimizer works on log G, which is convex in the mixture weights and
// shares its argmin with G.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gevprice/gev.hpp"
#include "gevprice/uncertainty.hpp"

namespace gevprice {

struct AdversaryOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  /// Accepted residual when rounding in log G stops the line search.
  double stall_tol = 1e-6;
};

struct AdversarySolution {
  std::vector<double> lambda;
  std::vector<double> a, b;  // parameters on the block's products, in block order
  double value = 0.0;
  double log_value = 0.0;
  /// -d log(value)/dz, which equals the common b on partition-homogeneous blocks.
  double slope = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Holds per-block data and a warm-start cache. Not safe to share across threads.
class AdversarySession {
 public:
  AdversarySession(const GevModel& model, const MixtureUncertaintySet& set, std::span<const double> costs,
                   AdversaryOptions opts = {});

  std::size_t blocks() const noexcept { return blocks_.size(); }
  const std::vector<std::size_t>& items(std::size_t n) const { return blocks_.at(n).items; }
  const MixtureUncertaintySet& set() const noexcept { return set_; }

  /// log G^n at markup z and weights lambda.
  double log_g(std::size_t n, double z, std::span<const double> lambda) const;

  AdversarySolution minimize(std::size_t n, double z);
  AdversarySolution maximize(std::size_t n, double z) const;

  /// z with min_lambda G^n(z) = alpha.
  double g_underbar_inverse(std::size_t n, double alpha);
  double g_underbar_inverse_log(std::size_t n, double log_alpha);

  void clear_cache();

 private:
  struct Block {
    std::vector<std::size_t> items;
    GevModel model;
    // base[k][j] = a^k_j - b^k_j c_j, slope[k][j] = b^k_j.
    std::vector<std::vector<double>> base, bsens;
    std::optional<std::vector<double>> warm;
  };

  double eval(const Block& blk, double z, std::span<const double> lambda, std::span<double> grad) const;
  AdversarySolution finish(const Block& blk, double z, std::vector<double> lambda) const;

  MixtureUncertaintySet set_;
  AdversaryOptions opts_;
  std::vector<Block> blocks_;
};

/// Block index defaults to 0 and must be given for partition-mode sets with
/// more than one block.
AdversarySolution minimize_G(const GevModel& model, const MixtureUncertaintySet& set,
                             std::span<const double> costs, double z,
                             std::optional<std::size_t> partition = std::nullopt);
AdversarySolution maximize_G(const GevModel& model, const MixtureUncertaintySet& set,
                             std::span<const double> costs, double z,
                             std::optional<std::size_t> partition = std::nullopt);
double g_underbar_inverse(const GevModel& model, const MixtureUncertaintySet& set, std::span<const double> costs,
                          std::size_t partition, double alpha);

}  // namespace gevprice
