#include "gevprice/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gevprice/errors.hpp"
#include "projected_gradient.hpp"

namespace gevprice {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Projection onto { x : n . x <= r }.
std::vector<double> halfspace(std::span<const double> x, const std::vector<double>& n, double r) {
  std::vector<double> out(x.begin(), x.end());
  const double over = dot(n, x) - r;
  if (over <= 0.0) return out;
  const double nn = dot(n, n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= over / nn * n[i];
  return out;
}

std::vector<double> prices_from(const ProductLine& line, const std::vector<double>& z) {
  std::vector<double> x(line.size());
  for (std::size_t n = 0; n < line.blocks(); ++n)
    for (std::size_t i : line.partitions[n]) x[i] = line.costs[i] + z[n];
  return x;
}

}  // namespace

void PenaltySpec::validate(std::size_t N) const {
  if (d.size() != r.size() || lambda.size() != r.size()) throw ConfigError("penalty spec lengths disagree");
  for (std::size_t t = 0; t < T(); ++t) {
    if (d[t].size() != N) throw ConfigError("penalty coefficients have the wrong length");
    bool any = false;
    for (double v : d[t]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("penalty coefficients must be nonnegative");
      any = any || v > 0.0;
    }
    if (!any) throw ConfigError("penalty coefficients are all zero");
    if (!(r[t] > 0.0) || !std::isfinite(r[t])) throw ConfigError("penalty thresholds must be positive");
    if (!(lambda[t] >= 0.0) || !std::isfinite(lambda[t])) throw ConfigError("penalty weights must be nonnegative");
  }
}

PenaltySpec PenaltySpec::from_product(const ProductLine& line, const ProductPenalty& pen) {
  if (pen.alpha.size() != pen.T() || pen.lambda.size() != pen.T())
    throw ConfigError("penalty spec lengths disagree");
  PenaltySpec spec;
  spec.r = pen.r;
  spec.lambda = pen.lambda;
  for (const auto& alpha : pen.alpha) {
    if (alpha.size() != line.size()) throw ConfigError("expected-sale coefficients have the wrong length");
    std::vector<double> d(line.blocks());
    for (std::size_t n = 0; n < line.blocks(); ++n) {
      const auto& items = line.partitions[n];
      d[n] = alpha[items.front()];
      for (std::size_t i : items)
        if (alpha[i] != d[n]) throw ConfigError("expected-sale coefficients must be constant on each partition");
    }
    spec.d.push_back(std::move(d));
  }
  spec.validate(line.blocks());
  return spec;
}

double penalty_violation(std::span<const double> pG, const PenaltySpec& spec) {
  double v = 0.0;
  for (std::size_t t = 0; t < spec.T(); ++t) v += std::max(0.0, dot(spec.d[t], pG) - spec.r[t]);
  return v;
}

double penalty_cost(std::span<const double> pG, const PenaltySpec& spec) {
  double v = 0.0;
  for (std::size_t t = 0; t < spec.T(); ++t) v += spec.lambda[t] * std::max(0.0, dot(spec.d[t], pG) - spec.r[t]);
  return v;
}

PenaltySolution robust_penalty_solve(const GevModel& model, const MixtureUncertaintySet& set,
                                     const ProductLine& line, const PenaltySpec& spec,
                                     const PenaltyOptions& opts) {
  const std::size_t N = line.blocks(), T = spec.T();
  spec.validate(N);
  PartitionOptions popt;
  popt.tol = opts.tol;
  popt.max_iter = opts.max_iter;
  popt.margin = opts.margin;
  const RobustSolution base = robust_price_partition(model, set, line, popt);

  auto finish = [&](ReducedProgram& prog, std::vector<double> p, int iters) {
    auto ev = prog.evaluate(p);
    PenaltySolution s;
    s.W = ev.W;
    s.H = ev.W - penalty_cost(p, spec);
    s.violation = penalty_violation(p, spec);
    s.markup = ev.z;
    s.prices = prices_from(line, ev.z);
    s.pG = std::move(p);
    s.iterations = iters;
    return s;
  };

  ReducedProgram prog(model, set, line);
  const bool all_zero = std::all_of(spec.lambda.begin(), spec.lambda.end(), [](double l) { return l == 0.0; });
  if (all_zero || penalty_violation(base.pG, spec) == 0.0) return finish(prog, base.pG, 0);

  auto proj_p = [&](std::span<const double> v) { return project_probabilities(v, opts.margin); };

  // Projected subgradient ascent with normalized steps c / sqrt(k).
  std::vector<double> p = base.pG, best = p, g(N), next(N);
  double best_h = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= opts.subgradient_iters; ++k) {
    auto ev = prog.evaluate(p);
    const double h = ev.W - penalty_cost(p, spec);
    if (h > best_h) {
      best_h = h;
      best = p;
    }
    g = ev.grad;
    for (std::size_t t = 0; t < T; ++t)
      if (dot(spec.d[t], p) > spec.r[t])
        for (std::size_t n = 0; n < N; ++n) g[n] -= spec.lambda[t] * spec.d[t][n];
    const double gn = std::sqrt(dot(g, g));
    if (gn == 0.0) break;
    const double step = opts.subgradient_scale / std::sqrt(static_cast<double>(k));
    for (std::size_t n = 0; n < N; ++n) next[n] = p[n] + step * g[n] / gn;
    p = proj_p(next);
  }

  // Polish on the smooth slack form: max W(p) - lambda . y, y >= 0, y_t >= d_t . p - r_t.
  std::vector<detail::Projection> sets;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> normal(N + T, 0.0);
    for (std::size_t n = 0; n < N; ++n) normal[n] = spec.d[t][n];
    normal[N + t] = -1.0;
    sets.push_back([normal, r = spec.r[t]](std::span<const double> x) { return halfspace(x, normal, r); });
  }
  sets.push_back([&](std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    auto pp = proj_p(x.subspan(0, N));
    std::copy(pp.begin(), pp.end(), out.begin());
    for (std::size_t t = 0; t < T; ++t) out[N + t] = std::max(0.0, out[N + t]);
    return out;
  });
  auto proj = [&](std::span<const double> x) { return detail::dykstra(x, sets, 1e-12); };
  auto f = [&](std::span<const double> x, std::span<double> grad) {
    auto ev = prog.evaluate(x.subspan(0, N));
    double v = ev.W;
    for (std::size_t n = 0; n < N; ++n) grad[n] = ev.grad[n];
    for (std::size_t t = 0; t < T; ++t) {
      v -= spec.lambda[t] * x[N + t];
      grad[N + t] = -spec.lambda[t];
    }
    return v;
  };
  std::vector<double> x0(N + T);
  std::copy(best.begin(), best.end(), x0.begin());
  for (std::size_t t = 0; t < T; ++t) x0[N + t] = std::max(0.0, dot(spec.d[t], best) - spec.r[t]);
  detail::PgOptions pg;
  pg.tol = opts.tol;
  pg.max_iter = opts.max_iter;
  pg.maximize = true;
  pg.first_step = 0.1;
  pg.noise = 1e-11;
  auto res = detail::projected_gradient(f, proj, x0, pg);
  if (!res.converged)
    throw ConvergenceError("penalty polish did not converge (residual " + detail::sci(res.residual) + ")",
                           std::vector<double>(res.x.begin(), res.x.begin() + static_cast<long>(N)),
                           res.residual);
  std::vector<double> polished(res.x.begin(), res.x.begin() + static_cast<long>(N));
  polished = proj_p(polished);
  PenaltySolution a = finish(prog, polished, opts.subgradient_iters + res.iterations);
  if (a.H >= best_h) return a;
  return finish(prog, best, opts.subgradient_iters + res.iterations);
}

PenaltySolution det_penalty_solve(const GevModel& model, const ChoiceParams& params, const ProductLine& line,
                                  const PenaltySpec& spec, const PenaltyOptions& opts) {
  MixtureUncertaintySet single({params}, {1.0}, 0.0, SetMode::partition, line.partitions);
  return robust_penalty_solve(model, single, line, spec, opts);
}

ConstrainedSolution constrained_reference_solve(const GevModel& model, const MixtureUncertaintySet& set,
                                                const ProductLine& line,
                                                const std::vector<std::vector<double>>& d,
                                                const std::vector<double>& r, const PenaltyOptions& opts) {
  const std::size_t N = line.blocks();
  PenaltySpec spec{d, r, std::vector<double>(r.size(), 0.0)};
  spec.validate(N);
  std::vector<double> tiny(N, 1e-6);
  if (penalty_violation(tiny, spec) > 0.0) throw DomainError("expected-sale constraints are infeasible");

  ReducedProgram prog(model, set, line);
  PartitionOptions popt;
  popt.tol = opts.tol;
  popt.max_iter = opts.max_iter;
  popt.margin = opts.margin;
  const RobustSolution base = robust_price_partition(model, set, line, popt);

  std::vector<detail::Projection> sets;
  for (std::size_t t = 0; t < spec.T(); ++t)
    sets.push_back([normal = d[t], rt = r[t]](std::span<const double> x) { return halfspace(x, normal, rt); });
  sets.push_back([&](std::span<const double> x) { return project_probabilities(x, opts.margin); });
  auto proj = [&](std::span<const double> x) { return detail::dykstra(x, sets, 1e-12); };

  ConstrainedSolution out;
  if (penalty_violation(base.pG, spec) == 0.0) {
    out.pG = base.pG;
    out.markup = base.markup;
    out.value = base.worst_case_revenue;
    return out;
  }
  auto f = [&](std::span<const double> p, std::span<double> grad) {
    auto ev = prog.evaluate(p);
    std::copy(ev.grad.begin(), ev.grad.end(), grad.begin());
    return ev.W;
  };
  detail::PgOptions pg;
  pg.tol = opts.tol;
  pg.max_iter = opts.max_iter;
  pg.maximize = true;
  pg.first_step = 0.1;
  pg.noise = 1e-11;
  auto res = detail::projected_gradient(f, proj, base.pG, pg);
  if (!res.converged)
    throw ConvergenceError("constrained reference problem did not converge (residual " +
                               detail::sci(res.residual) + ")",
                           res.x, res.residual);
  auto ev = prog.evaluate(res.x);
  out.pG = res.x;
  out.markup = ev.z;
  out.value = ev.W;
  return out;
}

SweepReport lambda_sweep_convergence(const GevModel& model, const MixtureUncertaintySet& set,
                                     const ProductLine& line, const PenaltySpec& spec,
                                     const std::vector<double>& lambda_grid, double epsilon,
                                     const PenaltyOptions& opts) {
  if (!(epsilon > 0.0)) throw DomainError("violation target must be positive");
  for (std::size_t j = 1; j < lambda_grid.size(); ++j)
    if (!(lambda_grid[j] > lambda_grid[j - 1])) throw ConfigError("lambda grid must be increasing");
  SweepReport rep;
  PartitionOptions popt;
  popt.tol = opts.tol;
  popt.max_iter = opts.max_iter;
  popt.margin = opts.margin;
  rep.delta_star = robust_price_partition(model, set, line, popt).worst_case_revenue;
  rep.phi_bar = constrained_reference_solve(model, set, line, spec.d, spec.r, opts).value;
  rep.lambda_threshold = (rep.delta_star - rep.phi_bar) / epsilon;
  for (double lam : lambda_grid) {
    PenaltySpec s = spec;
    std::fill(s.lambda.begin(), s.lambda.end(), lam);
    const PenaltySolution sol = robust_penalty_solve(model, set, line, s, opts);
    rep.rows.push_back({lam, sol.H, sol.violation});
  }
  for (std::size_t j = 1; j < rep.rows.size(); ++j)
    if (rep.rows[j].violation > rep.rows[j - 1].violation + 1e-7) rep.violation_monotone = false;
  for (const auto& row : rep.rows)
    if (row.lambda >= rep.lambda_threshold && row.violation > epsilon) rep.threshold_respected = false;
  return rep;
}

double penalty_profit(const GevModel& model, const ChoiceParams& params, std::span<const double> costs,
                      std::span<const double> prices, const ProductPenalty& pen) {
  auto p = choice_probabilities(model, params, prices);
  double profit = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) profit += (prices[i] - costs[i]) * p[i + 1];
  std::span<const double> prod(p.data() + 1, costs.size());
  for (std::size_t t = 0; t < pen.T(); ++t)
    profit -= pen.lambda[t] * std::max(0.0, dot(pen.alpha[t], prod) - pen.r[t]);
  return profit;
}

}  // namespace gevprice
