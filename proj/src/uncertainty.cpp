#include "gevprice/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gevprice/errors.hpp"

namespace gevprice {
namespace {

constexpr std::size_t kMaxVertexK = 12;

double clamp_sum(std::span<const double> v, std::span<const double> lo, std::span<const double> hi,
                 double theta) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += std::clamp(v[k] - theta, lo[k], hi[k]);
  return s;
}

double extreme(std::span<const double> values, std::span<const double> lo, std::span<const double> hi,
               bool want_max) {
  const std::size_t K = values.size();
  std::vector<std::size_t> idx(K);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return want_max ? values[x] > values[y] : values[x] < values[y];
  });
  std::vector<double> lam(lo.begin(), lo.end());
  double rem = 1.0 - std::accumulate(lo.begin(), lo.end(), 0.0);
  for (std::size_t k : idx) {
    if (rem <= 0.0) break;
    const double add = std::min(hi[k] - lo[k], rem);
    lam[k] += add;
    rem -= add;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < K; ++k) s += lam[k] * values[k];
  return s;
}

}  // namespace

MixtureUncertaintySet::MixtureUncertaintySet(std::vector<ChoiceParams> anchors, std::vector<double> tau,
                                             double eps, SetMode mode, Partition parts)
    : anchors_(std::move(anchors)), tau_(std::move(tau)), eps_(eps), mode_(mode) {
  if (anchors_.empty()) throw ConfigError("uncertainty set needs at least one anchor");
  if (tau_.size() != anchors_.size()) throw ConfigError("tau length must equal the anchor count");
  if (!(eps_ >= 0.0) || !std::isfinite(eps_)) throw ConfigError("eps must be finite and nonnegative");
  double sum = 0.0;
  for (double t : tau_) {
    if (!(t >= 0.0)) throw ConfigError("tau entries must be nonnegative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("tau must sum to one");
  m_ = anchors_.front().size();
  for (const auto& w : anchors_) w.validate(m_);

  if (mode_ == SetMode::joint) {
    std::vector<std::size_t> all(m_);
    std::iota(all.begin(), all.end(), 0);
    blocks_ = {std::move(all)};
    for (const auto& w : anchors_)
      if (!w.homogeneous()) throw ConfigError("joint-mode anchors need equal price sensitivities");
  } else {
    ProductLine probe{std::vector<double>(m_, 0.0), parts};
    probe.validate();
    blocks_ = std::move(parts);
    for (const auto& w : anchors_)
      if (!w.partition_homogeneous(blocks_))
        throw ConfigError("partition-mode anchors need equal price sensitivities within each part");
  }

  const std::size_t K = anchors_.size();
  lo_.resize(K);
  hi_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    lo_[k] = std::max(0.0, tau_[k] - eps_);
    hi_[k] = std::min(1.0, tau_[k] + eps_);
  }

  if (K <= kMaxVertexK) {
    // A vertex has at most one coordinate strictly inside its bounds.
    const std::size_t combos = std::size_t{1} << (K - 1);
    for (std::size_t free = 0; free < K; ++free) {
      for (std::size_t mask = 0; mask < combos; ++mask) {
        std::vector<double> v(K);
        double s = 0.0;
        std::size_t bit = 0;
        for (std::size_t k = 0; k < K; ++k) {
          if (k == free) continue;
          v[k] = (mask >> bit++) & 1 ? hi_[k] : lo_[k];
          s += v[k];
        }
        v[free] = 1.0 - s;
        if (v[free] < lo_[free] - 1e-12 || v[free] > hi_[free] + 1e-12) continue;
        v[free] = std::clamp(v[free], lo_[free], hi_[free]);
        bool dup = false;
        for (const auto& u : vertices_) {
          double d = 0.0;
          for (std::size_t k = 0; k < K; ++k) d = std::max(d, std::abs(u[k] - v[k]));
          if (d <= 1e-12) {
            dup = true;
            break;
          }
        }
        if (!dup) vertices_.push_back(std::move(v));
      }
    }
  }
}

MixtureUncertaintySet MixtureUncertaintySet::with_eps(double eps) const {
  return MixtureUncertaintySet(anchors_, tau_, eps, mode_, mode_ == SetMode::partition ? blocks_ : Partition{});
}

MixtureUncertaintySet MixtureUncertaintySet::with_mode(SetMode mode, Partition parts) const {
  return MixtureUncertaintySet(anchors_, tau_, eps_, mode, std::move(parts));
}

bool MixtureUncertaintySet::feasible(std::span<const double> lambda, double tol) const {
  if (lambda.size() != K()) return false;
  double s = 0.0;
  for (std::size_t k = 0; k < K(); ++k) {
    if (!std::isfinite(lambda[k])) return false;
    if (lambda[k] < lo_[k] - tol || lambda[k] > hi_[k] + tol) return false;
    s += lambda[k];
  }
  return std::abs(s - 1.0) <= tol * static_cast<double>(K());
}

ChoiceParams MixtureUncertaintySet::params_at(std::span<const double> lambda) const {
  std::vector<std::vector<double>> per(blocks(), std::vector<double>(lambda.begin(), lambda.end()));
  return params_at_blocks(per);
}

ChoiceParams MixtureUncertaintySet::params_at_blocks(const std::vector<std::vector<double>>& lambdas) const {
  if (lambdas.size() != blocks()) throw ConfigError("need one weight vector per block");
  for (const auto& l : lambdas)
    if (!feasible(l, 1e-9)) throw DomainError("mixture weights outside the uncertainty set");
  ChoiceParams out{std::vector<double>(m_, 0.0), std::vector<double>(m_, 0.0)};
  for (std::size_t n = 0; n < blocks(); ++n) {
    const auto& lam = lambdas[n];
    for (std::size_t i : blocks_[n]) {
      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < K(); ++k) {
        a += lam[k] * anchors_[k].a[i];
        b += lam[k] * anchors_[k].b[i];
      }
      out.a[i] = a;
      out.b[i] = b;
    }
  }
  // Equal anchor b within a block gives equal mixtures up to rounding; make it exact.
  for (const auto& block : blocks_)
    for (std::size_t i : block) out.b[i] = out.b[block.front()];
  return out;
}

ParamBounds MixtureUncertaintySet::bounds() const {
  ParamBounds bd;
  bd.a_lo.resize(m_);
  bd.a_hi.resize(m_);
  bd.b_lo.resize(m_);
  bd.b_hi.resize(m_);
  std::vector<double> va(K()), vb(K());
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t k = 0; k < K(); ++k) {
      va[k] = anchors_[k].a[i];
      vb[k] = anchors_[k].b[i];
    }
    bd.a_lo[i] = extreme(va, lo_, hi_, false);
    bd.a_hi[i] = extreme(va, lo_, hi_, true);
    bd.b_lo[i] = extreme(vb, lo_, hi_, false);
    bd.b_hi[i] = extreme(vb, lo_, hi_, true);
  }
  return bd;
}

std::vector<double> MixtureUncertaintySet::project(std::span<const double> v) const {
  const std::size_t K = this->K();
  if (v.size() != K) throw ConfigError("projection target has the wrong length");
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError("projection target is not finite");
  double t_lo = std::numeric_limits<double>::infinity(), t_hi = -t_lo;
  for (std::size_t k = 0; k < K; ++k) {
    t_lo = std::min(t_lo, v[k] - hi_[k]);
    t_hi = std::max(t_hi, v[k] - lo_[k]);
  }
  // clamp_sum is nonincreasing in theta: >= 1 at t_lo, <= 1 at t_hi.
  for (int it = 0; it < 200 && t_hi - t_lo > 1e-16 * (1.0 + std::abs(t_lo) + std::abs(t_hi)); ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (clamp_sum(v, lo_, hi_, mid) > 1.0)
      t_lo = mid;
    else
      t_hi = mid;
  }
  double theta = 0.5 * (t_lo + t_hi);

  // Exact theta on the free set identified by bisection.
  double fixed = 0.0, free_sum = 0.0;
  std::size_t nfree = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double u = v[k] - theta;
    if (u <= lo_[k])
      fixed += lo_[k];
    else if (u >= hi_[k])
      fixed += hi_[k];
    else {
      free_sum += v[k];
      ++nfree;
    }
  }
  if (nfree > 0) {
    const double exact = (free_sum - (1.0 - fixed)) / static_cast<double>(nfree);
    if (std::abs(clamp_sum(v, lo_, hi_, exact) - 1.0) <= std::abs(clamp_sum(v, lo_, hi_, theta) - 1.0))
      theta = exact;
  }
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k) out[k] = std::clamp(v[k] - theta, lo_[k], hi_[k]);
  return out;
}

const std::vector<std::vector<double>>& MixtureUncertaintySet::vertices() const {
  if (K() > kMaxVertexK) throw ConfigError("vertex enumeration needs K <= 12");
  return vertices_;
}

std::vector<double> MixtureUncertaintySet::sample_lambda(Rng& rng) const {
  const std::size_t K = this->K();
  if (eps_ == 0.0 || K == 1) return tau_;
  if (eps_ >= 1.0) {
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> g(K);
    double s = 0.0;
    for (auto& x : g) s += (x = ex(rng));
    for (auto& x : g) x /= s;
    return g;
  }
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  std::vector<double> x(tau_), d(K);
  const std::size_t steps = 50 * K;
  for (std::size_t s = 0; s < steps; ++s) {
    double mean = 0.0;
    for (auto& v : d) mean += (v = normal(rng));
    mean /= static_cast<double>(K);
    double norm = 0.0;
    for (auto& v : d) {
      v -= mean;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    double tmin = -std::numeric_limits<double>::infinity(), tmax = -tmin;
    for (std::size_t k = 0; k < K; ++k) {
      d[k] /= norm;
      if (d[k] > 0.0) {
        tmin = std::max(tmin, (lo_[k] - x[k]) / d[k]);
        tmax = std::min(tmax, (hi_[k] - x[k]) / d[k]);
      } else if (d[k] < 0.0) {
        tmin = std::max(tmin, (hi_[k] - x[k]) / d[k]);
        tmax = std::min(tmax, (lo_[k] - x[k]) / d[k]);
      }
    }
    if (!(tmax > tmin)) continue;
    const double t = tmin + (tmax - tmin) * unif(rng);
    for (std::size_t k = 0; k < K; ++k) x[k] = std::clamp(x[k] + t * d[k], lo_[k], hi_[k]);
  }
  return project(x);
}

SetSample MixtureUncertaintySet::sample(Rng& rng) const {
  SetSample s;
  s.lambdas.reserve(blocks());
  for (std::size_t n = 0; n < blocks(); ++n) s.lambdas.push_back(sample_lambda(rng));
  s.params = params_at_blocks(s.lambdas);
  return s;
}

std::vector<SetSample> MixtureUncertaintySet::sample_many(std::uint64_t seed, std::uint64_t stream,
                                                          std::size_t n) const {
  std::vector<SetSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, stream, i));
    out.push_back(sample(rng));
  }
  return out;
}

}  // namespace gevprice
