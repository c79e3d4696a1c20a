#include "gevprice/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gevprice/errors.hpp"
#include "gevprice/kernels.hpp"

namespace gevprice {
namespace {

thread_local std::vector<double> tl_gather;
thread_local std::vector<double> tl_scaled;
thread_local std::vector<double> tl_group;

void ensure(std::vector<double>& v, std::size_t n) {
  if (v.size() < n) v.resize(n);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite entry");
}

void require_positive(std::span<const double> y) {
  for (double v : y)
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("utility vector entries must be positive and finite");
}

double log_sum_exp(std::span<const double> v) {
  const auto& k = kernels::active();
  double m = k.max_value(v);
  if (!std::isfinite(m)) return m;
  return m + std::log(k.sum_exp_shifted(v, m));
}

// log(1 + e^l) without overflow.
double softplus(double l) { return l > 0 ? l + std::log1p(std::exp(-l)) : std::log1p(std::exp(l)); }

}  // namespace

void ProductLine::validate() const {
  const std::size_t m = costs.size();
  if (m == 0) throw ConfigError("product line is empty");
  for (double c : costs)
    if (!std::isfinite(c) || c < 0.0) throw ConfigError("costs must be finite and nonnegative");
  if (partitions.empty()) throw ConfigError("product line has no partitions");
  std::vector<int> seen(m, 0);
  for (const auto& part : partitions) {
    if (part.empty()) throw ConfigError("empty partition");
    for (std::size_t i : part) {
      if (i >= m) throw ConfigError("partition index out of range");
      if (seen[i]++) throw ConfigError("partitions overlap");
    }
  }
  for (int s : seen)
    if (!s) throw ConfigError("partitions do not cover every product");
}

std::vector<std::size_t> ProductLine::partition_of() const {
  std::vector<std::size_t> out(costs.size(), 0);
  for (std::size_t n = 0; n < partitions.size(); ++n)
    for (std::size_t i : partitions[n]) out[i] = n;
  return out;
}

ProductLine ProductLine::single(std::vector<double> costs) {
  ProductLine line;
  std::vector<std::size_t> all(costs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  line.costs = std::move(costs);
  line.partitions = {std::move(all)};
  return line;
}

void ChoiceParams::validate(std::size_t m) const {
  if (a.size() != m || b.size() != m) throw ConfigError("choice parameters have the wrong length");
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw DomainError("non-finite choice parameter");
    if (!(b[i] > 0.0)) throw DomainError("price sensitivities must be positive");
  }
}

bool ChoiceParams::homogeneous() const {
  return std::all_of(b.begin(), b.end(), [&](double v) { return v == b.front(); });
}

bool ChoiceParams::partition_homogeneous(const Partition& parts) const {
  for (const auto& part : parts)
    for (std::size_t i : part)
      if (b[i] != b[part.front()]) return false;
  return true;
}

GevModel GevModel::mnl(std::size_t m) {
  if (m == 0) throw ConfigError("model needs at least one product");
  GevModel g;
  g.variant_ = Variant::mnl;
  g.m_ = m;
  g.build_layout();
  return g;
}

GevModel GevModel::nested(std::size_t m, std::vector<Nest> nests, double mu) {
  if (m == 0) throw ConfigError("model needs at least one product");
  if (mu != 1.0) throw ConfigError("nested logit requires mu = 1 for degree-one homogeneity");
  std::vector<int> seen(m, 0);
  for (auto& nest : nests) {
    if (nest.items.empty()) throw ConfigError("empty nest");
    if (!(nest.mu_n >= mu) || !std::isfinite(nest.mu_n))
      throw ConfigError("nest scale mu_n must be finite and at least mu");
    if (nest.sigma.empty()) nest.sigma.assign(nest.items.size(), 1.0);
    if (nest.sigma.size() != nest.items.size()) throw ConfigError("sigma length does not match nest");
    for (double s : nest.sigma)
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("inclusion weights must be positive");
    for (std::size_t i : nest.items) {
      if (i >= m) throw ConfigError("nest index out of range");
      if (seen[i]++) throw ConfigError("nests overlap");
    }
  }
  for (int s : seen)
    if (!s) throw ConfigError("nests do not cover every product");
  GevModel g;
  g.variant_ = Variant::nested;
  g.m_ = m;
  g.mu_ = mu;
  g.nests_ = std::move(nests);
  g.build_layout();
  return g;
}

void GevModel::build_layout() {
  order_.clear();
  group_begin_.clear();
  group_mu_.clear();
  log_sigma_.clear();
  if (variant_ == Variant::mnl) {
    for (std::size_t i = 0; i < m_; ++i) order_.push_back(i);
    group_begin_ = {0, m_};
    group_mu_ = {1.0};
    log_sigma_.assign(m_, 0.0);
    return;
  }
  group_begin_.push_back(0);
  for (const auto& nest : nests_) {
    for (std::size_t j = 0; j < nest.items.size(); ++j) {
      order_.push_back(nest.items[j]);
      log_sigma_.push_back(std::log(nest.sigma[j]));
    }
    group_begin_.push_back(order_.size());
    group_mu_.push_back(nest.mu_n);
  }
}

double GevModel::log_value(std::span<const double> log_y) const {
  thread_local std::vector<double> unused;
  ensure(unused, m_);
  return log_shares(log_y, std::span<double>(unused.data(), m_));
}

double GevModel::log_shares(std::span<const double> log_y, std::span<double> shares) const {
  if (log_y.size() != m_) throw ConfigError("utility vector has the wrong length");
  const auto& k = kernels::active();
  const std::size_t groups = group_mu_.size();
  ensure(tl_gather, m_);
  ensure(tl_scaled, m_);
  ensure(tl_group, groups);
  double* gather = tl_gather.data();
  double* scaled = tl_scaled.data();
  double* inner = tl_group.data();

  for (std::size_t j = 0; j < m_; ++j) gather[j] = log_y[order_[j]];

  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = group_begin_[g], len = group_begin_[g + 1] - lo;
    std::span<const double> src(gather + lo, len);
    std::span<double> dst(scaled + lo, len);
    k.scale_offset(src, std::span<const double>(log_sigma_.data() + lo, len), group_mu_[g], dst);
    inner[g] = log_sum_exp(std::span<const double>(scaled + lo, len));
  }

  // Outer aggregation over groups: log G = LSE_g(L_g / mu_g).
  double log_g;
  if (groups == 1) {
    log_g = inner[0] / group_mu_[0];
  } else {
    thread_local std::vector<double> outer;
    ensure(outer, groups);
    for (std::size_t g = 0; g < groups; ++g) outer[g] = inner[g] / group_mu_[g];
    log_g = log_sum_exp(std::span<const double>(outer.data(), groups));
  }
  if (!std::isfinite(log_g)) throw DomainError("log G is not finite");

  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = group_begin_[g], len = group_begin_[g + 1] - lo;
    const double shift = inner[g] - inner[g] / group_mu_[g] + log_g;
    k.exp_shifted(std::span<const double>(scaled + lo, len), shift, std::span<double>(gather + lo, len));
  }
  for (std::size_t j = 0; j < m_; ++j) shares[order_[j]] = gather[j];
  return log_g;
}

bool GevModel::separable_over(const Partition& parts) const {
  if (variant_ == Variant::mnl) return true;
  std::vector<std::size_t> owner(m_, parts.size());
  for (std::size_t n = 0; n < parts.size(); ++n)
    for (std::size_t i : parts[n])
      if (i < m_) owner[i] = n;
  for (const auto& nest : nests_)
    for (std::size_t i : nest.items)
      if (owner[i] != owner[nest.items.front()]) return false;
  return true;
}

GevModel GevModel::restrict(std::span<const std::size_t> items) const {
  if (variant_ == Variant::mnl) return mnl(items.size());
  std::vector<std::size_t> local(m_, items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    if (items[j] >= m_) throw ConfigError("restriction index out of range");
    local[items[j]] = j;
  }
  std::vector<Nest> sub;
  for (const auto& nest : nests_) {
    std::size_t inside = 0;
    for (std::size_t i : nest.items) inside += local[i] < items.size();
    if (inside == 0) continue;
    if (inside != nest.items.size()) throw ConfigError("a nest straddles a partition boundary");
    Nest n{{}, nest.mu_n, nest.sigma};
    for (std::size_t i : nest.items) n.items.push_back(local[i]);
    sub.push_back(std::move(n));
  }
  return nested(items.size(), std::move(sub), mu_);
}

void log_utilities(const ChoiceParams& params, std::span<const double> prices, std::span<double> out) {
  kernels::active().affine_utility(params.a, params.b, prices, out);
}

double cpgf_value(const GevModel& model, std::span<const double> y) {
  require_positive(y);
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  return std::exp(model.log_value(ly));
}

std::vector<double> cpgf_weighted_grad(const GevModel& model, std::span<const double> y) {
  require_positive(y);
  std::vector<double> ly(y.size()), s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  const double g = std::exp(model.log_shares(ly, s));
  for (double& v : s) v *= g;
  return s;
}

std::vector<double> choice_probabilities(const GevModel& model, const ChoiceParams& params,
                                         std::span<const double> prices) {
  const std::size_t m = model.size();
  params.validate(m);
  if (prices.size() != m) throw ConfigError("price vector has the wrong length");
  require_finite(prices, "prices");
  std::vector<double> ly(m), out(m + 1);
  log_utilities(params, prices, ly);
  const double log_g = model.log_shares(ly, std::span<double>(out.data() + 1, m));
  // P_i = s_i G/(1+G), P_0 = 1/(1+G).
  const double buy = std::exp(log_g - softplus(log_g));
  out[0] = std::exp(-softplus(log_g));
  for (std::size_t i = 1; i <= m; ++i) out[i] *= buy;
  return out;
}

double expected_revenue(const GevModel& model, const ChoiceParams& params, std::span<const double> costs,
                        std::span<const double> prices) {
  if (costs.size() != model.size()) throw ConfigError("cost vector has the wrong length");
  auto p = choice_probabilities(model, params, prices);
  double r = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) r += (prices[i] - costs[i]) * p[i + 1];
  return r;
}

double partition_value(const GevModel& model, const ProductLine& line, std::size_t n, double z,
                       const ChoiceParams& params) {
  if (n >= line.blocks()) throw ConfigError("partition index out of range");
  if (!model.separable_over(line.partitions))
    throw ConfigError("model is not separable over the partitions");
  const auto& items = line.partitions[n];
  GevModel sub = model.restrict(items);
  std::vector<double> ly(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    std::size_t i = items[j];
    ly[j] = params.a[i] - params.b[i] * (z + line.costs[i]);
  }
  return std::exp(sub.log_value(ly));
}

PropertyReport gev_property_check(const CpgfFn& value, const CpgfGradFn& grad, std::span<const double> y,
                                  double tol, unsigned seed) {
  PropertyReport rep;
  const std::size_t m = y.size();
  std::vector<double> yy(y.begin(), y.end());
  const double g = value(yy);
  rep.nonnegative = g >= 0.0 && std::isfinite(g);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  std::vector<double> ly(m);
  for (int t = 0; t < 5; ++t) {
    const double lam = std::exp(logscale(rng));
    for (std::size_t i = 0; i < m; ++i) ly[i] = lam * yy[i];
    const double err = std::abs(value(ly) - lam * g) / (1.0 + std::abs(lam * g));
    rep.homogeneity_error = std::max(rep.homogeneity_error, err);
  }
  rep.homogeneous = rep.homogeneity_error <= tol;

  auto w = grad(yy);
  double sum = 0.0;
  for (double v : w) sum += v;
  rep.euler_error = std::abs(sum - g) / (1.0 + std::abs(g));
  rep.euler = rep.euler_error <= tol;

  // sum_j Y_j d2G/dY_i dY_j from four-point second differences of G.
  const double rel = 1e-4;
  std::vector<double> p(yy);
  auto eval_shift = [&](std::size_t i, double hi, std::size_t j, double hj) {
    p = yy;
    p[i] += hi;
    p[j] += hj;
    return value(p);
  };
  for (std::size_t i = 0; i < m; ++i) {
    const double hi = rel * yy[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double hj = rel * yy[j];
      double d2;
      if (i == j) {
        p = yy;
        p[i] = yy[i] + hi;
        const double fp = value(p);
        p[i] = yy[i] - hi;
        const double fm = value(p);
        d2 = (fp - 2.0 * g + fm) / (hi * hi);
      } else {
        d2 = (eval_shift(i, hi, j, hj) - eval_shift(i, hi, j, -hj) - eval_shift(i, -hi, j, hj) +
              eval_shift(i, -hi, j, -hj)) /
             (4.0 * hi * hj);
      }
      acc += yy[j] * d2;
    }
    rep.mixed_partial_error = std::max(rep.mixed_partial_error, std::abs(acc));
  }
  rep.mixed_partials = rep.mixed_partial_error <= 1e-4;
  return rep;
}

PropertyReport gev_property_check(const GevModel& model, std::span<const double> y, double tol,
                                  unsigned seed) {
  return gev_property_check([&](std::span<const double> v) { return cpgf_value(model, v); },
                            [&](std::span<const double> v) { return cpgf_weighted_grad(model, v); }, y,
                            tol, seed);
}

}  // namespace gevprice
