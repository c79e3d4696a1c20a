#include "gevprice/pricing_robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gevprice/errors.hpp"
#include "gevprice/lambertw.hpp"
#include "gevprice/parallel.hpp"
#include "gevprice/pricing_det.hpp"
#include "projected_gradient.hpp"

namespace gevprice {
namespace {

void require_joint_homogeneous(const MixtureUncertaintySet& set) {
  if (set.blocks() != 1) throw ConfigError("homogeneous robust pricing needs a joint uncertainty set");
}

void require_matching_blocks(const MixtureUncertaintySet& set, const ProductLine& line) {
  if (set.blocks() != line.blocks()) throw ConfigError("uncertainty blocks do not match the partitions");
  for (std::size_t n = 0; n < line.blocks(); ++n) {
    auto a = set.block_items()[n], b = line.partitions[n];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ConfigError("uncertainty blocks do not match the partitions");
  }
}

double log1p_sum_exp(std::span<const double> logs) {
  double m = 0.0;  // log 1
  for (double v : logs) m = std::max(m, v);
  double s = std::exp(-m);
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

ChoiceParams full_params(const AdversarySession& session, const std::vector<AdversarySolution>& per_block,
                         std::size_t m) {
  ChoiceParams p{std::vector<double>(m), std::vector<double>(m)};
  for (std::size_t n = 0; n < per_block.size(); ++n) {
    const auto& items = session.items(n);
    for (std::size_t j = 0; j < items.size(); ++j) {
      p.a[items[j]] = per_block[n].a[j];
      p.b[items[j]] = per_block[n].b[j];
    }
  }
  return p;
}

}  // namespace

std::pair<double, double> bracket_homogeneous(const GevModel& model, const MixtureUncertaintySet& set,
                                              std::span<const double> costs) {
  require_joint_homogeneous(set);
  const std::size_t m = set.size();
  if (model.size() != m || costs.size() != m) throw ConfigError("inputs disagree on the product count");
  const ParamBounds bd = set.bounds();
  std::vector<double> ly(m);
  for (std::size_t i = 0; i < m; ++i) ly[i] = bd.a_lo[i] - bd.b_hi[i] * costs[i];
  const double z_lo = (1.0 + lambert_w0_exp(model.log_value(ly) - 1.0)) / bd.b_hi[0];
  for (std::size_t i = 0; i < m; ++i) ly[i] = bd.a_hi[i] - bd.b_lo[i] * costs[i];
  const double z_hi = (1.0 + lambert_w0_exp(model.log_value(ly) - 1.0)) / bd.b_lo[0];
  return {z_lo, std::max(z_lo, z_hi)};
}

double homogeneous_residual(AdversarySession& session, double z) {
  const AdversarySolution s = session.minimize(0, z);
  const double b = s.b.front();
  const double log_gamma = session.log_g(0, 0.0, s.lambda);
  return z - (1.0 + lambert_w0_exp(log_gamma - 1.0)) / b;
}

RobustSolution robust_price_homogeneous(const GevModel& model, const MixtureUncertaintySet& set,
                                        std::span<const double> costs) {
  auto [z_lo, z_hi] = bracket_homogeneous(model, set, costs);
  AdversarySession session(model, set, costs);
  double lo = z_lo, hi = z_hi;
  double f_lo = homogeneous_residual(session, lo);
  double f_hi = homogeneous_residual(session, hi);
  int it = 0;
  double z;
  if (std::abs(f_lo) <= 1e-12) {
    z = lo;
  } else if (std::abs(f_hi) <= 1e-12) {
    z = hi;
  } else {
    if (f_lo > 0.0 || f_hi < 0.0) throw NumericError("fixed-point residual does not change sign on the bracket");
    for (; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = homogeneous_residual(session, mid);
      if (fm <= 0.0)
        lo = mid;
      else
        hi = mid;
    }
    z = 0.5 * (lo + hi);
  }
  RobustSolution sol;
  sol.diagnostics.fixed_point_residual = std::abs(homogeneous_residual(session, z));
  if (sol.diagnostics.fixed_point_residual > 1e-8) throw NumericError("robust fixed point residual too large");
  sol.diagnostics.z_lo = z_lo;
  sol.diagnostics.z_hi = z_hi;
  sol.diagnostics.iterations = it;
  sol.markup = {z};
  sol.prices.resize(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) sol.prices[i] = costs[i] + z;
  sol.worst_params = full_params(session, {session.minimize(0, z)}, costs.size());
  sol.worst_case_revenue = expected_revenue(model, sol.worst_params, costs, sol.prices);
  return sol;
}

ReducedProgram::ReducedProgram(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line)
    : line_(line), session_(model, set, line.costs) {
  line_.validate();
  require_matching_blocks(set, line_);
}

ReducedProgram::Eval ReducedProgram::evaluate(std::span<const double> pG) {
  const std::size_t N = this->N();
  if (pG.size() != N) throw ConfigError("aggregate probability vector has the wrong length");
  double S = 0.0;
  for (double p : pG) {
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("aggregate probabilities must be positive");
    S += p;
  }
  if (!(S < 1.0)) throw DomainError("aggregate probabilities must sum to less than one");
  const double log_rest = std::log1p(-S);
  Eval ev;
  ev.z.resize(N);
  ev.b_star.resize(N);
  ev.g_under.resize(N);
  ev.grad.resize(N);
  double tail = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double log_alpha = std::log(pG[n]) - log_rest;
    ev.z[n] = session_.g_underbar_inverse_log(n, log_alpha);
    const AdversarySolution s = session_.minimize(n, ev.z[n]);
    ev.b_star[n] = s.slope;
    ev.g_under[n] = s.value;
    ev.W += ev.z[n] * pG[n];
    tail += pG[n] / ev.b_star[n];
  }
  tail /= (1.0 - S);
  for (std::size_t n = 0; n < N; ++n) ev.grad[n] = ev.z[n] - 1.0 / ev.b_star[n] - tail;
  return ev;
}

std::vector<double> ReducedProgram::z_of_p(std::span<const double> pG) { return evaluate(pG).z; }

std::vector<double> ReducedProgram::p_of_z(std::span<const double> z) {
  const std::size_t N = this->N();
  if (z.size() != N) throw ConfigError("markup vector has the wrong length");
  std::vector<double> lg(N), p(N);
  for (std::size_t n = 0; n < N; ++n) lg[n] = session_.minimize(n, z[n]).log_value;
  const double denom = log1p_sum_exp(lg);
  for (std::size_t n = 0; n < N; ++n) p[n] = std::exp(lg[n] - denom);
  return p;
}

std::vector<double> z_of_p(const GevModel& model, const MixtureUncertaintySet& set, const ProductLine& line,
                           std::span<const double> pG) {
  ReducedProgram prog(model, set, line);
  return prog.z_of_p(pG);
}

std::pair<double, std::vector<double>> reduced_objective_and_grad(const GevModel& model,
                                                                  const MixtureUncertaintySet& set,
                                                                  const ProductLine& line,
                                                                  std::span<const double> pG) {
  ReducedProgram prog(model, set, line);
  auto ev = prog.evaluate(pG);
  return {ev.W, std::move(ev.grad)};
}

std::vector<double> project_probabilities(std::span<const double> v, double margin) {
  const std::size_t N = v.size();
  const double cap = 1.0 - margin;
  if (static_cast<double>(N) * margin > cap) throw ConfigError("interior margin too large for the dimension");
  std::vector<double> u(N);
  double s = 0.0;
  for (std::size_t n = 0; n < N; ++n) s += (u[n] = std::max(v[n], margin));
  if (s <= cap) return u;
  // Onto { p >= margin, sum p = cap }: p = max(v - theta, margin).
  auto total = [&](double th) {
    double t = 0.0;
    for (std::size_t n = 0; n < N; ++n) t += std::max(v[n] - th, margin);
    return t;
  };
  double lo = 0.0, hi = *std::max_element(v.begin(), v.end()) - margin;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) > cap)
      lo = mid;
    else
      hi = mid;
  }
  double theta = 0.5 * (lo + hi);
  double fixed = 0.0, free_sum = 0.0;
  std::size_t nfree = 0;
  for (std::size_t n = 0; n < N; ++n) {
    if (v[n] - theta > margin) {
      free_sum += v[n];
      ++nfree;
    } else {
      fixed += margin;
    }
  }
  if (nfree > 0) {
    const double exact = (free_sum - (cap - fixed)) / static_cast<double>(nfree);
    if (std::abs(total(exact) - cap) <= std::abs(total(theta) - cap)) theta = exact;
  }
  for (std::size_t n = 0; n < N; ++n) u[n] = std::max(v[n] - theta, margin);
  return u;
}

RobustSolution robust_price_partition(const GevModel& model, const MixtureUncertaintySet& set,
                                      const ProductLine& line, const PartitionOptions& opts) {
  ReducedProgram prog(model, set, line);
  const std::size_t N = prog.N();

  std::vector<double> p0;
  if (opts.start) {
    p0 = *opts.start;
  } else {
    try {
      const ChoiceParams mean = set.mean_params();
      const DetSolution det = det_price_partition(model, mean, line);
      std::vector<double> lg(N);
      for (std::size_t n = 0; n < N; ++n)
        lg[n] = std::log(partition_value(model, line, n, det.markup[n], mean));
      const double denom = log1p_sum_exp(lg);
      p0.resize(N);
      for (std::size_t n = 0; n < N; ++n) p0[n] = std::exp(lg[n] - denom);
    } catch (const Error&) {
      p0.assign(N, 0.5 / static_cast<double>(N));
    }
  }
  if (p0.size() != N) throw ConfigError("start vector has the wrong length");

  detail::PgOptions pg;
  pg.tol = opts.tol;
  pg.max_iter = opts.max_iter;
  pg.maximize = true;
  pg.first_step = 0.1;
  pg.noise = 1e-11;
  auto f = [&](std::span<const double> p, std::span<double> g) {
    auto ev = prog.evaluate(p);
    std::copy(ev.grad.begin(), ev.grad.end(), g.begin());
    return ev.W;
  };
  auto proj = [&](std::span<const double> v) { return project_probabilities(v, opts.margin); };
  auto res = detail::projected_gradient(f, proj, p0, pg);
  if (!res.converged)
    throw ConvergenceError("reduced program did not converge (gradient residual " + detail::sci(res.residual) +
                               ")",
                           res.x, res.residual);

  auto ev = prog.evaluate(res.x);
  RobustSolution sol;
  sol.pG = res.x;
  sol.markup = ev.z;
  sol.prices.resize(line.size());
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t i : line.partitions[n]) sol.prices[i] = line.costs[i] + ev.z[n];
  std::vector<AdversarySolution> per;
  for (std::size_t n = 0; n < N; ++n) per.push_back(prog.session().minimize(n, ev.z[n]));
  sol.worst_params = full_params(prog.session(), per, line.size());
  sol.worst_case_revenue = ev.W;

  double tail = 0.0;
  for (std::size_t n = 0; n < N; ++n) tail += ev.g_under[n] / ev.b_star[n];
  double worst = 0.0;
  for (std::size_t n = 0; n < N; ++n) worst = std::max(worst, std::abs(ev.z[n] - 1.0 / ev.b_star[n] - tail));
  sol.diagnostics.fixed_point_residual = worst;
  sol.diagnostics.gradient_norm = res.residual;
  sol.diagnostics.iterations = res.iterations;
  if (worst > 1e-5) throw NumericError("partition fixed-point residual too large");
  return sol;
}

AdversaryValue adversary_markup_value(const GevModel& model, const MixtureUncertaintySet& set,
                                      const ProductLine& line, std::span<const double> z) {
  require_matching_blocks(set, line);
  const std::size_t N = line.blocks();
  if (z.size() != N) throw ConfigError("markup vector has the wrong length");
  if (N > 20) throw ConfigError("vertex-configuration enumeration needs at most 20 partitions");
  AdversarySession session(model, set, line.costs);
  std::vector<double> g_lo(N), g_hi(N);
  for (std::size_t n = 0; n < N; ++n) {
    g_lo[n] = session.minimize(n, z[n]).value;
    g_hi[n] = session.maximize(n, z[n]).value;
  }
  AdversaryValue out;
  out.value = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (std::size_t{1} << N); ++mask) {
    double num = 0.0, den = 1.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double g = (mask >> n) & 1 ? g_hi[n] : g_lo[n];
      num += z[n] * g;
      den += g;
    }
    const double rho = num / den;
    if (rho < out.value) {
      out.value = rho;
      out.config.assign(N, 0);
      for (std::size_t n = 0; n < N; ++n) out.config[n] = (mask >> n) & 1;
    }
  }
  return out;
}

SampledSummary summarize(std::vector<double> revenues) {
  if (revenues.empty()) throw DomainError("no revenues to summarize");
  SampledSummary s;
  s.worst = *std::min_element(revenues.begin(), revenues.end());
  s.max = *std::max_element(revenues.begin(), revenues.end());
  s.average = std::accumulate(revenues.begin(), revenues.end(), 0.0) / static_cast<double>(revenues.size());
  s.average = std::clamp(s.average, s.worst, s.max);
  s.revenues = std::move(revenues);
  return s;
}

std::vector<double> scenario_revenues(const GevModel& model, const std::vector<SetSample>& scenarios,
                                      std::span<const double> costs, std::span<const double> prices) {
  std::vector<double> out(scenarios.size());
  parallel_for(scenarios.size(),
               [&](std::size_t i) { out[i] = expected_revenue(model, scenarios[i].params, costs, prices); });
  return out;
}

SampledSummary sampled_worst_case(const GevModel& model, const MixtureUncertaintySet& set,
                                  std::span<const double> prices, std::span<const double> costs,
                                  std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw DomainError("need at least one sample");
  std::vector<double> out(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    Rng rng(derive_seed(seed, stream::kEvaluation, i));
    out[i] = expected_revenue(model, set.sample(rng).params, costs, prices);
  });
  return summarize(std::move(out));
}

}  // namespace gevprice
