#include "gevprice/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gevprice/baselines.hpp"
#include "gevprice/errors.hpp"
#include "gevprice/parallel.hpp"
#include "gevprice/rng.hpp"

namespace gevprice {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Partition equal_blocks(std::size_t m, std::size_t parts) {
  if (parts == 0 || m % parts != 0) throw ConfigError("products must split into equal contiguous blocks");
  Partition out(parts);
  const std::size_t len = m / parts;
  for (std::size_t i = 0; i < m; ++i) out[i / len].push_back(i);
  return out;
}

std::string fmt6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" so byte comparison is stable across tiny sign flips.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::vector<double> prices_for(const ProductLine& line, const std::vector<double>& z) {
  std::vector<double> x(line.size());
  if (z.size() == 1) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = line.costs[i] + z[0];
    return x;
  }
  for (std::size_t n = 0; n < line.blocks(); ++n)
    for (std::size_t i : line.partitions[n]) x[i] = line.costs[i] + z[n];
  return x;
}

void fill_stats(MethodRow& row, std::vector<double> revenues) {
  auto s = summarize(std::move(revenues));
  row.average = s.average;
  row.worst = s.worst;
  row.max = s.max;
  row.revenues = std::move(s.revenues);
}

MethodRow failed(const std::string& method, const std::string& what) {
  MethodRow r;
  r.method = method;
  r.ok = false;
  r.error = what;
  r.average = r.worst = r.max = r.percentile_rank = r.violation = kNaN;
  return r;
}

void finish_report(EvaluationReport& rep, std::size_t bins) {
  double ro_worst = kNaN;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rep.rows) {
    if (!r.ok) continue;
    if (r.method == "RO") ro_worst = r.worst;
    lo = std::min(lo, r.worst);
    hi = std::max(hi, r.max);
  }
  for (auto& r : rep.rows) {
    if (!r.ok) continue;
    r.percentile_rank = std::isnan(ro_worst) ? kNaN : percentile_rank(r.revenues, ro_worst);
    r.hist = histogram(r.revenues, lo, hi, bins);
  }
}

EvaluationReport run_cell(const Instance& inst, double eps, double lambda, bool with_penalty, std::size_t index,
                          const ComparisonOptions& opts) {
  EvaluationReport rep;
  rep.eps = eps;
  rep.lambda = lambda;
  const MixtureUncertaintySet set = inst.set.with_eps(eps);
  const auto scenarios = set.sample_many(derive_seed(opts.seed, stream::kEvaluation, index), stream::kEvaluation,
                                         opts.n_eval);
  std::optional<ProductPenalty> pen;
  if (with_penalty) {
    pen = *inst.penalty;
    std::fill(pen->lambda.begin(), pen->lambda.end(), lambda);
  }
  auto score = [&](const std::vector<double>& prices) {
    std::vector<double> out(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      out[s] = pen ? penalty_profit(inst.model, scenarios[s].params, inst.line.costs, prices, *pen)
                   : expected_revenue(inst.model, scenarios[s].params, inst.line.costs, prices);
    return out;
  };

  // RO
  try {
    MethodRow row;
    row.method = "RO";
    if (pen) {
      const auto sol = robust_penalty_solve(inst.model, set, inst.line, PenaltySpec::from_product(inst.line, *pen),
                                            opts.penalty);
      row.markup = sol.markup;
      row.violation = sol.violation;
    } else if (set.mode() == SetMode::joint) {
      row.markup = robust_price_homogeneous(inst.model, set, inst.line.costs).markup;
    } else {
      row.markup = robust_price_partition(inst.model, set, inst.line).markup;
    }
    fill_stats(row, score(prices_for(inst.line, row.markup)));
    rep.rows.push_back(std::move(row));
  } catch (const Error& e) {
    rep.rows.push_back(failed("RO", e.what()));
  }

  // DET
  try {
    MethodRow row;
    row.method = "DET";
    const auto sol = det_baseline(inst.model, set, inst.line, pen ? &*pen : nullptr, opts.penalty);
    row.markup = sol.markup;
    row.violation = sol.violation;
    fill_stats(row, score(sol.prices));
    rep.rows.push_back(std::move(row));
  } catch (const Error& e) {
    rep.rows.push_back(failed("DET", e.what()));
  }

  // SA: one seed for all s1 so candidate sets are nested.
  const std::uint64_t sa_seed = derive_seed(opts.seed, stream::kCandidates, index);
  for (std::size_t s1 : opts.s1) {
    const std::string name = "SA" + std::to_string(s1);
    try {
      MethodRow row;
      row.method = name;
      const auto sol =
          sampling_baseline(inst.model, set, inst.line, s1, opts.s2, sa_seed, pen ? &*pen : nullptr, opts.penalty);
      row.markup = sol.markup;
      row.violation = sol.violation;
      fill_stats(row, score(sol.prices));
      rep.rows.push_back(std::move(row));
    } catch (const Error& e) {
      rep.rows.push_back(failed(name, e.what()));
    }
  }
  finish_report(rep, opts.bins);
  return rep;
}

json params_json(const ChoiceParams& p) { return json{{"a", p.a}, {"b", p.b}}; }

ChoiceParams params_from(const json& j) {
  return ChoiceParams{j.at("a").get<std::vector<double>>(), j.at("b").get<std::vector<double>>()};
}

}  // namespace

void Instance::validate() const {
  line.validate();
  if (model.size() != line.size() || set.size() != line.size())
    throw ConfigError("model, uncertainty set and product line disagree on the product count");
  if (!model.separable_over(line.partitions)) throw ConfigError("model is not separable over the partitions");
  if (set.mode() == SetMode::partition && set.blocks() != line.blocks())
    throw ConfigError("uncertainty blocks do not match the partitions");
  if (set.mode() == SetMode::joint && line.blocks() != 1)
    throw ConfigError("a joint uncertainty set needs a single partition");
  if (penalty) PenaltySpec::from_product(line, *penalty);
}

Instance generate_instance(const GenerateOptions& opts) {
  if (opts.m == 0 || opts.K == 0 || opts.N == 0) throw ConfigError("m, K and N must be positive");
  if (opts.N > 1 && opts.m % opts.N != 0) throw ConfigError("m must be divisible by N");
  Rng rng(derive_seed(opts.seed, stream::kInstance));
  std::uniform_real_distribution<double> cost(0.5, 2.0), inter(0.0, 2.0), sens(0.5, 2.0), scale(1.0, 2.0);
  std::exponential_distribution<double> ex(1.0);

  Instance inst;
  inst.seed = opts.seed;
  inst.line.costs.resize(opts.m);
  for (auto& c : inst.line.costs) c = cost(rng);
  inst.line.partitions = equal_blocks(opts.m, opts.N);

  std::vector<ChoiceParams> anchors(opts.K);
  for (auto& w : anchors) {
    w.a.resize(opts.m);
    w.b.resize(opts.m);
    for (auto& a : w.a) a = inter(rng);
    for (const auto& part : inst.line.partitions) {
      const double b = sens(rng);
      for (std::size_t i : part) w.b[i] = b;
    }
  }
  std::vector<double> tau(opts.K);
  double s = 0.0;
  for (auto& t : tau) s += (t = ex(rng));
  for (auto& t : tau) t /= s;

  if (opts.nested) {
    const std::size_t nn = opts.nests ? opts.nests : opts.N;
    std::vector<Nest> nests;
    for (auto& items : equal_blocks(opts.m, nn)) nests.push_back(Nest{std::move(items), scale(rng), {}});
    inst.model = GevModel::nested(opts.m, std::move(nests));
  } else {
    inst.model = GevModel::mnl(opts.m);
  }
  const SetMode mode = opts.N == 1 ? SetMode::joint : SetMode::partition;
  inst.set = MixtureUncertaintySet(std::move(anchors), std::move(tau), opts.eps, mode,
                                   mode == SetMode::partition ? inst.line.partitions : Partition{});
  if (opts.penalty) {
    ProductPenalty pen;
    pen.alpha = {std::vector<double>(opts.m, 1.0)};
    pen.r = {0.2};
    pen.lambda = {0.5};
    inst.penalty = std::move(pen);
  }
  inst.validate();
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["seed"] = inst.seed;
  j["costs"] = inst.line.costs;
  j["partitions"] = inst.line.partitions;
  if (inst.model.variant() == GevModel::Variant::mnl) {
    j["model"] = json{{"variant", "mnl"}};
  } else {
    json nests = json::array();
    for (const auto& n : inst.model.nests())
      nests.push_back(json{{"items", n.items}, {"mu_n", n.mu_n}, {"sigma", n.sigma}});
    j["model"] = json{{"variant", "nested"}, {"mu", inst.model.mu()}, {"nests", nests}};
  }
  json anchors = json::array();
  for (const auto& w : inst.set.anchors()) anchors.push_back(params_json(w));
  j["uncertainty"] = json{{"anchors", anchors},
                          {"tau", inst.set.tau()},
                          {"eps", inst.set.eps()},
                          {"mode", inst.set.mode() == SetMode::joint ? "joint" : "partition"}};
  if (inst.penalty) {
    json cons = json::array();
    for (std::size_t t = 0; t < inst.penalty->T(); ++t)
      cons.push_back(
          json{{"alpha", inst.penalty->alpha[t]}, {"r", inst.penalty->r[t]}, {"lambda", inst.penalty->lambda[t]}});
    j["penalty"] = json{{"constraints", cons}};
  }
  return j;
}

Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.line.costs = j.at("costs").get<std::vector<double>>();
    const std::size_t m = inst.line.costs.size();
    if (j.contains("partitions")) {
      inst.line.partitions = j.at("partitions").get<Partition>();
    } else {
      inst.line = ProductLine::single(inst.line.costs);
    }
    const json& mj = j.at("model");
    const std::string variant = mj.at("variant").get<std::string>();
    if (variant == "mnl") {
      inst.model = GevModel::mnl(m);
    } else if (variant == "nested") {
      std::vector<Nest> nests;
      for (const auto& n : mj.at("nests")) {
        Nest nest;
        nest.items = n.at("items").get<std::vector<std::size_t>>();
        nest.mu_n = n.at("mu_n").get<double>();
        if (n.contains("sigma")) nest.sigma = n.at("sigma").get<std::vector<double>>();
        nests.push_back(std::move(nest));
      }
      inst.model = GevModel::nested(m, std::move(nests), mj.value("mu", 1.0));
    } else {
      throw ConfigError("unknown model variant '" + variant + "'");
    }
    const json& uj = j.at("uncertainty");
    std::vector<ChoiceParams> anchors;
    for (const auto& a : uj.at("anchors")) anchors.push_back(params_from(a));
    const std::string mode = uj.value("mode", std::string("joint"));
    if (mode != "joint" && mode != "partition") throw ConfigError("unknown uncertainty mode '" + mode + "'");
    const SetMode sm = mode == "joint" ? SetMode::joint : SetMode::partition;
    inst.set = MixtureUncertaintySet(std::move(anchors), uj.at("tau").get<std::vector<double>>(),
                                     uj.at("eps").get<double>(), sm,
                                     sm == SetMode::partition ? inst.line.partitions : Partition{});
    if (j.contains("penalty")) {
      ProductPenalty pen;
      for (const auto& c : j.at("penalty").at("constraints")) {
        pen.alpha.push_back(c.at("alpha").get<std::vector<double>>());
        pen.r.push_back(c.at("r").get<double>());
        pen.lambda.push_back(c.value("lambda", 0.0));
      }
      inst.penalty = std::move(pen);
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

json solution_to_json(const RobustSolution& sol) {
  json diag{{"fixed_point_residual", sol.diagnostics.fixed_point_residual},
            {"iterations", sol.diagnostics.iterations}};
  if (sol.pG.empty()) {
    diag["bracket"] = {sol.diagnostics.z_lo, sol.diagnostics.z_hi};
  } else {
    diag["gradient_norm"] = sol.diagnostics.gradient_norm;
    diag["pG"] = sol.pG;
  }
  diag["worst_params"] = params_json(sol.worst_params);
  return json{{"markup", sol.markup},
              {"prices", sol.prices},
              {"worst_case_revenue", sol.worst_case_revenue},
              {"diagnostics", diag}};
}

json solution_to_json(const PenaltySolution& sol) {
  return json{{"markup", sol.markup},
              {"prices", sol.prices},
              {"worst_case_revenue", sol.W},
              {"diagnostics", json{{"objective", sol.H},
                                   {"violation", sol.violation},
                                   {"pG", sol.pG},
                                   {"iterations", sol.iterations}}}};
}

double percentile_rank(std::span<const double> revenues, double threshold) {
  if (revenues.empty()) throw DomainError("percentile rank of an empty list");
  std::size_t below = 0;
  for (double r : revenues) below += r < threshold;
  return static_cast<double>(below) / static_cast<double>(revenues.size());
}

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double width = hi - lo;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      const double pos = (v - lo) / width * static_cast<double>(bins);
      b = pos <= 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[b];
  }
  return h;
}

std::vector<EvaluationReport> run_comparison(const Instance& inst, const std::vector<double>& eps_grid,
                                             const ComparisonOptions& opts) {
  std::vector<EvaluationReport> out(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t e) { out[e] = run_cell(inst, eps_grid[e], 0.0, false, e, opts); });
  return out;
}

std::vector<EvaluationReport> run_penalty_comparison(const Instance& inst, const std::vector<double>& lambda_grid,
                                                     const std::vector<double>& eps_grid,
                                                     const ComparisonOptions& opts) {
  if (!inst.penalty) throw ConfigError("instance has no penalty constraints");
  const std::size_t cells = lambda_grid.size() * eps_grid.size();
  std::vector<EvaluationReport> out(cells);
  parallel_for(cells, [&](std::size_t c) {
    const std::size_t l = c / eps_grid.size(), e = c % eps_grid.size();
    // Scenario sets depend only on eps so rows for different lambda are comparable.
    out[c] = run_cell(inst, eps_grid[e], lambda_grid[l], true, e, opts);
  });
  return out;
}

std::string comparison_csv(const std::vector<EvaluationReport>& reports) {
  std::ostringstream os;
  os << "eps,method,average,worst,max,percentile_rank_vs_ro_worst\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      os << fmt6(rep.eps) << ',' << r.method << ',' << fmt6(r.average) << ',' << fmt6(r.worst) << ','
         << fmt6(r.max) << ',' << fmt6(r.percentile_rank) << '\n';
  return os.str();
}

std::string penalty_csv(const std::vector<EvaluationReport>& reports) {
  std::ostringstream os;
  os << "lambda,eps,method,average,worst,max,percentile_rank_vs_ro_worst,violation\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      os << fmt6(rep.lambda) << ',' << fmt6(rep.eps) << ',' << r.method << ',' << fmt6(r.average) << ','
         << fmt6(r.worst) << ',' << fmt6(r.max) << ',' << fmt6(r.percentile_rank) << ',' << fmt6(r.violation)
         << '\n';
  return os.str();
}

json histograms_json(const std::vector<EvaluationReport>& reports) {
  json rows = json::array();
  for (const auto& rep : reports) {
    json methods = json::object();
    double lo = kNaN, hi = kNaN;
    std::size_t bins = 0;
    for (const auto& r : rep.rows) {
      if (!r.ok) {
        methods[r.method] = json{{"error", r.error}};
        continue;
      }
      lo = r.hist.lo;
      hi = r.hist.hi;
      bins = r.hist.counts.size();
      methods[r.method] = json{{"counts", r.hist.counts}};
    }
    json edges = json::array();
    for (std::size_t b = 0; b <= bins; ++b) edges.push_back(lo + (hi - lo) * static_cast<double>(b) / bins);
    rows.push_back(json{{"eps", rep.eps}, {"lambda", rep.lambda}, {"edges", edges}, {"methods", methods}});
  }
  return json{{"rows", rows}};
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo, hi, step;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || hi < lo)
    throw ConfigError("grid must look like LO:HI:STEP with STEP > 0");
  std::vector<double> out;
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
  return out;
}

}  // namespace gevprice
