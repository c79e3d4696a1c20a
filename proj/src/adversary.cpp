#include "gevprice/adversary.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gevprice/errors.hpp"
#include "gevprice/kernels.hpp"
#include "projected_gradient.hpp"

namespace gevprice {
namespace {

thread_local std::vector<double> tl_logy;
thread_local std::vector<double> tl_shares;

}  // namespace

AdversarySession::AdversarySession(const GevModel& model, const MixtureUncertaintySet& set,
                                   std::span<const double> costs, AdversaryOptions opts)
    : set_(set), opts_(opts) {
  if (model.size() != set.size() || costs.size() != set.size())
    throw ConfigError("model, uncertainty set and costs disagree on the product count");
  if (!model.separable_over(set.block_items()))
    throw ConfigError("model is not separable over the uncertainty blocks");
  const std::size_t K = set.K();
  for (const auto& items : set.block_items()) {
    Block blk{items, model.restrict(items), {}, {}, std::nullopt};
    blk.base.assign(K, std::vector<double>(items.size()));
    blk.bsens.assign(K, std::vector<double>(items.size()));
    for (std::size_t k = 0; k < K; ++k) {
      const auto& w = set.anchors()[k];
      for (std::size_t j = 0; j < items.size(); ++j) {
        const std::size_t i = items[j];
        blk.base[k][j] = w.a[i] - w.b[i] * costs[i];
        blk.bsens[k][j] = w.b[i];
      }
    }
    blocks_.push_back(std::move(blk));
  }
}

double AdversarySession::eval(const Block& blk, double z, std::span<const double> lambda,
                              std::span<double> grad) const {
  const auto& kern = kernels::active();
  const std::size_t len = blk.items.size(), K = set_.K();
  if (tl_logy.size() < len) tl_logy.resize(len);
  if (tl_shares.size() < len) tl_shares.resize(len);
  std::span<double> ly(tl_logy.data(), len), sh(tl_shares.data(), len);
  std::fill(ly.begin(), ly.end(), 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (lambda[k] == 0.0) continue;
    kern.axpy(lambda[k], blk.base[k], ly);
    kern.axpy(-z * lambda[k], blk.bsens[k], ly);
  }
  const double lg = blk.model.log_shares(ly, sh);
  if (!grad.empty())
    for (std::size_t k = 0; k < K; ++k) grad[k] = kern.dot(sh, blk.base[k]) - z * kern.dot(sh, blk.bsens[k]);
  return lg;
}

double AdversarySession::log_g(std::size_t n, double z, std::span<const double> lambda) const {
  if (lambda.size() != set_.K()) throw ConfigError("mixture weight vector has the wrong length");
  return eval(blocks_.at(n), z, lambda, {});
}

AdversarySolution AdversarySession::finish(const Block& blk, double z, std::vector<double> lambda) const {
  AdversarySolution sol;
  const std::size_t len = blk.items.size(), K = set_.K();
  sol.log_value = eval(blk, z, lambda, {});
  sol.value = std::exp(sol.log_value);
  sol.a.assign(len, 0.0);
  sol.b.assign(len, 0.0);
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t i = blk.items[j];
    for (std::size_t k = 0; k < K; ++k) {
      sol.a[j] += lambda[k] * set_.anchors()[k].a[i];
      sol.b[j] += lambda[k] * set_.anchors()[k].b[i];
    }
  }
  double slope = 0.0;
  for (std::size_t j = 0; j < len; ++j) slope += tl_shares[j] * sol.b[j];
  sol.slope = slope;
  sol.lambda = std::move(lambda);
  return sol;
}

AdversarySolution AdversarySession::minimize(std::size_t n, double z) {
  if (!std::isfinite(z)) throw DomainError("markup must be finite");
  Block& blk = blocks_.at(n);
  if (set_.eps() == 0.0 || set_.K() == 1) return finish(blk, z, set_.tau());

  detail::PgOptions opt;
  opt.tol = opts_.tol;
  opt.max_iter = opts_.max_iter;
  opt.stall_tol = opts_.stall_tol;
  auto f = [&](std::span<const double> lam, std::span<double> g) { return eval(blk, z, lam, g); };
  auto proj = [&](std::span<const double> v) { return set_.project(v); };
  auto res = detail::projected_gradient(f, proj, blk.warm ? *blk.warm : set_.tau(), opt);
  if (!res.converged) {
    // A stale warm start can stall the line search; retry once from tau.
    if (blk.warm) res = detail::projected_gradient(f, proj, set_.tau(), opt);
    if (!res.converged)
      throw ConvergenceError("adversary minimization did not converge (residual " +
                                 detail::sci(res.residual) + ")",
                             res.x, res.residual);
  }
  blk.warm = res.x;
  AdversarySolution sol = finish(blk, z, std::move(res.x));
  sol.iterations = res.iterations;
  sol.residual = res.residual;
  return sol;
}

AdversarySolution AdversarySession::maximize(std::size_t n, double z) const {
  if (!std::isfinite(z)) throw DomainError("markup must be finite");
  const Block& blk = blocks_.at(n);
  if (set_.eps() == 0.0 || set_.K() == 1) return finish(blk, z, set_.tau());
  const auto& verts = set_.vertices();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const double lg = eval(blk, z, verts[v], {});
    if (lg > best) {
      best = lg;
      arg = v;
    }
  }
  AdversarySolution sol = finish(blk, z, verts[arg]);
  sol.iterations = static_cast<int>(verts.size());
  return sol;
}

double AdversarySession::g_underbar_inverse(std::size_t n, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("inverse needs a positive finite target");
  return g_underbar_inverse_log(n, std::log(alpha));
}

double AdversarySession::g_underbar_inverse_log(std::size_t n, double log_alpha) {
  if (!std::isfinite(log_alpha)) throw DomainError("inverse needs a finite log target");
  auto h = [&](double z, double* slope) {
    auto s = minimize(n, z);
    if (slope) *slope = -s.slope;
    return s.log_value - log_alpha;
  };

  // h is strictly decreasing with range (-inf, inf); bracket by doubling.
  double zl, zr, hl, hr;
  double h0 = h(0.0, nullptr);
  if (h0 == 0.0) return 0.0;
  double step = 1.0;
  int doublings = 0;
  if (h0 > 0.0) {
    zl = 0.0;
    hl = h0;
    for (;;) {
      zr = step;
      hr = h(zr, nullptr);
      if (hr <= 0.0) break;
      zl = zr;
      hl = hr;
      step *= 2.0;
      if (++doublings >= 200) throw NumericError("could not bracket the inverse of the minimized CPGF");
    }
  } else {
    zr = 0.0;
    hr = h0;
    for (;;) {
      zl = -step;
      hl = h(zl, nullptr);
      if (hl >= 0.0) break;
      zr = zl;
      hr = hl;
      step *= 2.0;
      if (++doublings >= 200) throw NumericError("could not bracket the inverse of the minimized CPGF");
    }
  }
  if (hr == 0.0) return zr;
  if (hl == 0.0) return zl;

  // Safeguarded Newton on the bracket.
  double z = zl - hl * (zr - zl) / (hr - hl);
  for (int it = 0; it < 300; ++it) {
    double d;
    const double hz = h(z, &d);
    if (std::abs(hz) <= 1e-13) return z;
    if (hz > 0.0)
      zl = z;
    else
      zr = z;
    if (zr - zl <= 1e-13 * (1.0 + std::abs(z))) return z;
    double next = d < 0.0 ? z - hz / d : 0.5 * (zl + zr);
    if (!(next > zl && next < zr)) next = 0.5 * (zl + zr);
    z = next;
  }
  return z;
}

void AdversarySession::clear_cache() {
  for (auto& b : blocks_) b.warm.reset();
}

namespace {

std::size_t resolve_block(const MixtureUncertaintySet& set, std::optional<std::size_t> partition) {
  if (partition) {
    if (*partition >= set.blocks()) throw ConfigError("partition index out of range");
    return *partition;
  }
  if (set.blocks() != 1) throw ConfigError("a partition index is required for a partition-mode set");
  return 0;
}

}  // namespace

AdversarySolution minimize_G(const GevModel& model, const MixtureUncertaintySet& set, std::span<const double> costs,
                             double z, std::optional<std::size_t> partition) {
  AdversarySession s(model, set, costs);
  return s.minimize(resolve_block(set, partition), z);
}

AdversarySolution maximize_G(const GevModel& model, const MixtureUncertaintySet& set, std::span<const double> costs,
                             double z, std::optional<std::size_t> partition) {
  AdversarySession s(model, set, costs);
  return s.maximize(resolve_block(set, partition), z);
}

double g_underbar_inverse(const GevModel& model, const MixtureUncertaintySet& set, std::span<const double> costs,
                          std::size_t partition, double alpha) {
  AdversarySession s(model, set, costs);
  return s.g_underbar_inverse(resolve_block(set, partition), alpha);
}

}  // namespace gevprice
