#pragma once

// GEV choice models (multinomial and nested logit), choice probabilities and
// expected revenue.
//
// Evaluation runs in the log domain: callers pass log Y_i = a_i - b_i x_i and
// the model returns log G together with the normalized weighted gradient
// s_i = Y_i dG/dY_i / G. Because G is homogeneous of degree one this never
// overflows, whatever the magnitude of the utilities.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gevprice {

using Partition = std::vector<std::vector<std::size_t>>;

struct ProductLine {
  std::vector<double> costs;
  Partition partitions;

  std::size_t size() const noexcept { return costs.size(); }
  std::size_t blocks() const noexcept { return partitions.size(); }

  /// Throws ConfigError when the partitions do not tile {0..m-1} or a cost is
  /// negative or non-finite.
  void validate() const;

  /// partition index of every product.
  std::vector<std::size_t> partition_of() const;

  /// One partition holding every product.
  static ProductLine single(std::vector<double> costs);
};

struct ChoiceParams {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const noexcept { return a.size(); }
  void validate(std::size_t m) const;

  /// b_i == b_j for every pair (exact comparison).
  bool homogeneous() const;
  /// b_i == b_j whenever i and j share a partition.
  bool partition_homogeneous(const Partition& parts) const;
};

struct Nest {
  std::vector<std::size_t> items;
  double mu_n = 1.0;
  std::vector<double> sigma;  // empty means all ones
};

class GevModel {
 public:
  enum class Variant { mnl, nested };

  static GevModel mnl(std::size_t m);
  /// Nests must tile {0..m-1}. Requires mu == 1 and mu_n >= mu.
  static GevModel nested(std::size_t m, std::vector<Nest> nests, double mu = 1.0);

  Variant variant() const noexcept { return variant_; }
  std::size_t size() const noexcept { return m_; }
  double mu() const noexcept { return mu_; }
  const std::vector<Nest>& nests() const noexcept { return nests_; }

  /// log G(Y) given log Y.
  double log_value(std::span<const double> log_y) const;

  /// Fills shares_i = Y_i dG_i(Y) / G(Y) and returns log G(Y).
  double log_shares(std::span<const double> log_y, std::span<double> shares) const;

  /// Every nest lies inside a single part.
  bool separable_over(const Partition& parts) const;

  /// Sub-model on the listed products, re-indexed 0..items.size()-1.
  /// Throws ConfigError if a nest straddles the boundary of the subset.
  GevModel restrict(std::span<const std::size_t> items) const;

 private:
  GevModel() = default;
  void build_layout();

  Variant variant_ = Variant::mnl;
  std::size_t m_ = 0;
  double mu_ = 1.0;
  std::vector<Nest> nests_;

  // Items laid out nest by nest so that every group is a contiguous slice.
  std::vector<std::size_t> order_;
  std::vector<std::size_t> group_begin_;
  std::vector<double> group_mu_;
  std::vector<double> log_sigma_;
};

/// log Y_i = a_i - b_i x_i.
void log_utilities(const ChoiceParams& params, std::span<const double> prices,
                   std::span<double> out);

double cpgf_value(const GevModel& model, std::span<const double> y);
std::vector<double> cpgf_weighted_grad(const GevModel& model, std::span<const double> y);

/// Entry 0 is the no-purchase option, entry i+1 is product i.
std::vector<double> choice_probabilities(const GevModel& model, const ChoiceParams& params,
                                         std::span<const double> prices);

double expected_revenue(const GevModel& model, const ChoiceParams& params,
                        std::span<const double> costs, std::span<const double> prices);

/// G^n(Y^n) with Y_i = exp(a_i - b_i (z + c_i)) for i in partition n.
double partition_value(const GevModel& model, const ProductLine& line, std::size_t n, double z,
                       const ChoiceParams& params);

struct PropertyReport {
  bool nonnegative = true;
  bool homogeneous = true;
  bool euler = true;
  bool mixed_partials = true;
  double homogeneity_error = 0.0;
  double euler_error = 0.0;
  double mixed_partial_error = 0.0;

  bool all() const noexcept { return nonnegative && homogeneous && euler && mixed_partials; }
};

using CpgfFn = std::function<double(std::span<const double>)>;
using CpgfGradFn = std::function<std::vector<double>(std::span<const double>)>;

/// Checks nonnegativity, degree-one homogeneity at a few random scalings, the
/// Euler identity sum_i Y_i dG_i = G, and sum_j Y_j d2G/dY_i dY_j = 0 by
/// second differences. `grad` returns the weighted gradient Y_i dG_i.
PropertyReport gev_property_check(const CpgfFn& value, const CpgfGradFn& grad,
                                  std::span<const double> y, double tol, unsigned seed = 1);
PropertyReport gev_property_check(const GevModel& model, std::span<const double> y, double tol,
                                  unsigned seed = 1);

}  // namespace gevprice
