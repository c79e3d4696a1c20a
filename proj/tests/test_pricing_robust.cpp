#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gevprice/errors.hpp"
#include "gevprice/lambertw.hpp"
#include "gevprice/pricing_det.hpp"
#include "gevprice/pricing_robust.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace gevprice;

namespace {

std::vector<double> random_interior(Rng& rng, std::size_t N) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(N + 1);
  double s = 0.0;
  for (auto& x : v) s += (x = ex(rng));
  std::vector<double> p(N);
  for (std::size_t n = 0; n < N; ++n) p[n] = 0.02 + 0.9 * v[n] / s;
  double t = std::accumulate(p.begin(), p.end(), 0.0);
  if (t > 0.95)
    for (auto& x : p) x *= 0.95 / t;
  return p;
}

std::vector<double> markups_to_prices(const ProductLine& line, std::span<const double> z) {
  std::vector<double> x(line.costs);
  for (std::size_t n = 0; n < line.blocks(); ++n)
    for (std::size_t i : line.partitions[n]) x[i] += z[n];
  return x;
}

}  // namespace

TEST(RobustHomogeneous, FixedPointAndBracket) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto s = cases::small_instance(seed, 1, 4, 3, 0.2, seed % 2, true);
    const auto sol = robust_price_homogeneous(s.model, s.set, s.line.costs);
    const double z = sol.markup[0];
    AdversarySession session(s.model, s.set, s.line.costs);
    EXPECT_LE(std::fabs(homogeneous_residual(session, z)), 1e-8);
    const auto [lo, hi] = bracket_homogeneous(s.model, s.set, s.line.costs);
    EXPECT_LE(lo, z);
    EXPECT_LE(z, hi);
    EXPECT_EQ(sol.diagnostics.z_lo, lo);
    // residual from the oracle minimizer over a lambda grid
    const auto& items = s.line.partitions[0];
    double gbest = 1e300;
    std::vector<double> lbest;
    for (const auto& l : oracle::lambda_grid(s.set.lambda_lo(), s.set.lambda_hi(), 1e-3)) {
      const double g = oracle::block_G(s.model, oracle::mix(s.set, l), s.line.costs, items, z);
      if (g < gbest) gbest = g, lbest = l;
    }
    const auto p = oracle::mix(s.set, lbest);
    const double g0 = oracle::block_G(s.model, p, s.line.costs, items, 0.0);
    const double f = z - (1.0 + lambert_w0(g0 * std::exp(-1.0))) / p.b[0];
    EXPECT_LE(std::fabs(f), 1e-3);
    // worst-case revenue equals the revenue at the reported worst parameters
    EXPECT_NEAR(oracle::direct_revenue(s.model, sol.worst_params, s.line.costs, sol.prices), sol.worst_case_revenue,
                1e-10);
    EXPECT_GE(sol.worst_case_revenue, 0.0);
    for (std::size_t i = 0; i < s.line.size(); ++i) EXPECT_NEAR(sol.prices[i], s.line.costs[i] + z, 1e-15);
  }
}

TEST(RobustHomogeneous, ZeroRadiusIsDeterministic) {
  const auto s = cases::small_instance(7, 1, 5, 4, 0.0, true, true);
  const auto sol = robust_price_homogeneous(s.model, s.set, s.line.costs);
  const auto det = det_price_homogeneous(s.model, s.set.mean_params(), s.line.costs);
  EXPECT_NEAR(sol.markup[0], det.markup[0], 1e-8);
  const auto [lo, hi] = bracket_homogeneous(s.model, s.set, s.line.costs);
  EXPECT_NEAR(lo, det.markup[0], 1e-10);
  EXPECT_NEAR(hi, det.markup[0], 1e-10);
}

TEST(RobustHomogeneous, BoxSetMatchesLowAHighB) {
  const double alo[2] = {0.4, 1.1}, ahi[2] = {1.2, 1.5}, blo = 0.9, bhi = 1.4;
  std::vector<ChoiceParams> anchors;
  for (int i0 = 0; i0 < 2; ++i0)
    for (int i1 = 0; i1 < 2; ++i1)
      for (int ib = 0; ib < 2; ++ib) {
        const double b = ib ? bhi : blo;
        anchors.push_back({{i0 ? ahi[0] : alo[0], i1 ? ahi[1] : alo[1]}, {b, b}});
      }
  MixtureUncertaintySet set(anchors, std::vector<double>(8, 0.125), 1.0, SetMode::joint);
  for (const auto& model : {GevModel::mnl(2), GevModel::nested(2, {Nest{{0, 1}, 1.8, {}}})}) {
    const std::vector<double> costs{0.5, 0.8};
    const auto sol = robust_price_homogeneous(model, set, costs);
    const auto det = det_price_homogeneous(model, {{alo[0], alo[1]}, {bhi, bhi}}, costs);
    EXPECT_NEAR(sol.markup[0], det.markup[0], 1e-7);
  }
}

TEST(RobustHomogeneous, NestedGridMinimax) {
  const auto s = cases::small_instance(11, 1, 2, 2, 0.3, true, true);
  const auto sol = robust_price_homogeneous(s.model, s.set, s.line.costs);
  const auto& items = s.line.partitions[0];
  const auto rho = [&](double z, double g) { return z * g / (1.0 + g); };
  const double maxmin = oracle::scan_max(
      [&](double z) { return rho(z, oracle::block_G_min_k2(s.model, s.set, s.line.costs, items, z)); }, 0.0, 8.0,
      400);
  const auto lo = s.set.lambda_lo(), hi = s.set.lambda_hi();
  const double a = std::max(lo[0], 1.0 - hi[1]), b = std::min(hi[0], 1.0 - lo[1]);
  const double minmax = oracle::scan_min(
      [&](double l1) {
        const double l[2] = {l1, 1.0 - l1};
        const auto p = oracle::mix(s.set, l);
        return oracle::scan_max(
            [&](double z) { return rho(z, oracle::block_G(s.model, p, s.line.costs, items, z)); }, 0.0, 8.0, 200);
      },
      a, b, 100);
  EXPECT_NEAR(maxmin, minmax, 1e-3);
  EXPECT_NEAR(sol.worst_case_revenue, maxmin, 1e-3);
  EXPECT_NEAR(sol.worst_case_revenue, minmax, 1e-3);
}

TEST(RobustHomogeneous, WorstCaseFallsWithRadius) {
  const auto base = cases::small_instance(13, 1, 6, 4, 0.0, true, true);
  double prev = 1e300;
  for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const auto set = base.set.with_eps(eps);
    const double v = robust_price_homogeneous(base.model, set, base.line.costs).worst_case_revenue;
    EXPECT_LE(v, prev + 1e-12);
    prev = v;
  }
}

TEST(RobustHomogeneous, SaddleInequalities) {
  const auto s = cases::small_instance(17, 1, 5, 4, 0.2, true, true);
  const auto sol = robust_price_homogeneous(s.model, s.set, s.line.costs);
  const double star = expected_revenue(s.model, sol.worst_params, s.line.costs, sol.prices);
  Rng rng(5);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(sol.prices);
    const double delta = d(rng);
    for (auto& v : x) v += delta;
    EXPECT_LE(expected_revenue(s.model, sol.worst_params, s.line.costs, x), star + 1e-6);
  }
  for (const auto& sample : s.set.sample_many(9, stream::kEvaluation, 100))
    EXPECT_GE(expected_revenue(s.model, sample.params, s.line.costs, sol.prices), star - 1e-6);
}

TEST(ReducedProgram, GradientMatchesFiniteDifference) {
  const auto s = cases::small_instance(19, 3, 2, 3, 0.2, true);
  ReducedProgram prog(s.model, s.set, s.line);
  Rng rng(3);
  for (int c = 0; c < 50; ++c) {
    auto p = random_interior(rng, 3);
    const auto e = prog.evaluate(p);
    double err = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < 3; ++n) {
      const double h = 1e-6 * p[n];
      auto pp = p, pm = p;
      pp[n] += h;
      pm[n] -= h;
      const double fd = (prog.evaluate(pp).W - prog.evaluate(pm).W) / (2 * h);
      err = std::max(err, std::fabs(fd - e.grad[n]));
      scale = std::max(scale, std::fabs(e.grad[n]));
    }
    EXPECT_LE(err, 1e-5 * scale) << c;
  }
}

TEST(ReducedProgram, SingleProductClosedForm) {
  MixtureUncertaintySet set({{{0.0}, {1.0}}}, {1.0}, 0.0, SetMode::partition, {{0}});
  const auto model = GevModel::mnl(1);
  const ProductLine line{{0.0}, {{0}}};
  for (double q : {0.05, 0.2, 0.5, 0.8}) {
    const std::vector<double> p{q};
    const auto [W, g] = reduced_objective_and_grad(model, set, line, p);
    EXPECT_NEAR(W, q * std::log((1 - q) / q), 1e-10);
    EXPECT_NEAR(g[0], std::log((1 - q) / q) - 1.0 / (1.0 - q), 1e-9);
  }
}

TEST(ReducedProgram, MidpointConcavity) {
  const auto s = cases::small_instance(23, 3, 2, 3, 0.25, true);
  ReducedProgram prog(s.model, s.set, s.line);
  Rng rng(4);
  for (int c = 0; c < 200; ++c) {
    const auto p = random_interior(rng, 3), q = random_interior(rng, 3);
    std::vector<double> mid(3);
    for (std::size_t n = 0; n < 3; ++n) mid[n] = 0.5 * (p[n] + q[n]);
    EXPECT_GE(prog.evaluate(mid).W, 0.5 * (prog.evaluate(p).W + prog.evaluate(q).W) - 1e-9);
  }
}

TEST(ReducedProgram, PzRoundTrip) {
  const auto s = cases::small_instance(29, 3, 2, 3, 0.2, true);
  ReducedProgram prog(s.model, s.set, s.line);
  Rng rng(6);
  for (int c = 0; c < 20; ++c) {
    const auto p = random_interior(rng, 3);
    const auto z = prog.z_of_p(p);
    const auto back = prog.p_of_z(z);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(back[n], p[n], 1e-10);
  }
  const std::vector<double> bad{0.6, 0.5, 0.1};
  EXPECT_THROW(prog.evaluate(bad), DomainError);
}

TEST(RobustPartition, FixedPointResidual) {
  for (std::uint64_t seed : {31, 32, 33}) {
    const auto s = cases::small_instance(seed, 3, 3, 4, 0.15, seed % 2);
    const auto sol = robust_price_partition(s.model, s.set, s.line);
    EXPECT_LE(sol.diagnostics.fixed_point_residual, 1e-5);
    EXPECT_LE(sol.diagnostics.gradient_norm, 1e-7);
    // independent residual: z_n - 1/b_n - sum_l G_l / b_l at the solver's worst parameters
    double sum = 0.0;
    std::vector<double> b(3), g(3);
    for (std::size_t n = 0; n < 3; ++n) {
      const auto& items = s.line.partitions[n];
      b[n] = sol.worst_params.b[items[0]];
      g[n] = oracle::block_G(s.model, sol.worst_params, s.line.costs, items, sol.markup[n]);
      sum += g[n] / b[n];
    }
    for (std::size_t n = 0; n < 3; ++n) EXPECT_LE(std::fabs(sol.markup[n] - 1.0 / b[n] - sum), 1e-5);
  }
}

TEST(RobustPartition, Multistart) {
  const auto s = cases::small_instance(37, 3, 2, 3, 0.2, true);
  const auto ref = robust_price_partition(s.model, s.set, s.line);
  Rng rng(derive_seed(37, stream::kMultistart));
  for (int c = 0; c < 5; ++c) {
    PartitionOptions opts;
    opts.start = random_interior(rng, 3);
    const auto sol = robust_price_partition(s.model, s.set, s.line, opts);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(sol.pG[n], ref.pG[n], 1e-5);
  }
}

TEST(RobustPartition, ReducesToHomogeneousAndDeterministic) {
  const auto j = cases::small_instance(41, 1, 4, 3, 0.2, true, true);
  const auto h = robust_price_homogeneous(j.model, j.set, j.line.costs);
  const auto pset = j.set.with_mode(SetMode::partition, j.line.partitions);
  const auto p = robust_price_partition(j.model, pset, j.line);
  EXPECT_NEAR(p.markup[0], h.markup[0], 1e-6);

  const auto s = cases::small_instance(43, 3, 2, 3, 0.0, true);
  const auto sol = robust_price_partition(s.model, s.set, s.line);
  const auto det = det_price_partition(s.model, s.set.mean_params(), s.line);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(sol.markup[n], det.markup[n], 1e-6);
}

TEST(RobustPartition, VertexConfigGridOracle) {
  for (std::uint64_t seed : {47, 48}) {
    const auto s = cases::small_instance(seed, 2, 2, 2, 0.3, seed % 2);
    const auto sol = robust_price_partition(s.model, s.set, s.line);
    const auto best = oracle::grid_max_2d(
        [&](double z1, double z2) {
          const std::vector<double> z{z1, z2};
          return oracle::config_worst(s.model, s.set, s.line, z);
        },
        0.0, 6.0, 41, 6);
    EXPECT_NEAR(sol.worst_case_revenue, best.value, 1e-3);
    EXPECT_NEAR(sol.markup[0], best.x, 2e-2);
    EXPECT_NEAR(sol.markup[1], best.y, 2e-2);
  }
}

TEST(RobustPartition, AdversaryValueAtOptimum) {
  const auto s = cases::small_instance(53, 3, 2, 3, 0.2, true);
  const auto sol = robust_price_partition(s.model, s.set, s.line);
  const auto av = adversary_markup_value(s.model, s.set, s.line, sol.markup);
  EXPECT_NEAR(av.value, sol.worst_case_revenue, 1e-6);
  for (int c : av.config) EXPECT_EQ(c, 0);
  // zero markup on one partition: the adversary inflates it
  std::vector<double> z(sol.markup);
  z[1] = 0.0;
  const auto av0 = adversary_markup_value(s.model, s.set, s.line, z);
  EXPECT_EQ(av0.config[1], 1);
  EXPECT_EQ(av0.config[0], 0);
}

TEST(RobustPartition, SaddleInequalities) {
  const auto s = cases::small_instance(59, 3, 2, 4, 0.2, true);
  const auto sol = robust_price_partition(s.model, s.set, s.line);
  const double star = expected_revenue(s.model, sol.worst_params, s.line.costs, sol.prices);
  EXPECT_NEAR(star, sol.worst_case_revenue, 1e-6);
  Rng rng(8);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> z(sol.markup);
    for (auto& v : z) v = std::max(0.0, v + d(rng));
    EXPECT_LE(expected_revenue(s.model, sol.worst_params, s.line.costs, markups_to_prices(s.line, z)), star + 1e-6);
  }
  for (const auto& sample : s.set.sample_many(10, stream::kEvaluation, 100))
    EXPECT_GE(expected_revenue(s.model, sample.params, s.line.costs, sol.prices), star - 1e-6);
}

TEST(SampledWorstCase, DegenerateAndBounded) {
  const auto s0 = cases::small_instance(61, 2, 3, 3, 0.0, true);
  const auto sol0 = robust_price_partition(s0.model, s0.set, s0.line);
  const auto sw0 = sampled_worst_case(s0.model, s0.set, sol0.prices, s0.line.costs, 20, 1);
  EXPECT_NEAR(sw0.worst, sw0.max, 1e-14);
  EXPECT_NEAR(sw0.average, expected_revenue(s0.model, s0.set.mean_params(), s0.line.costs, sol0.prices), 1e-14);

  const auto s = cases::small_instance(62, 2, 3, 3, 0.3, true);
  const auto sol = robust_price_partition(s.model, s.set, s.line);
  const auto sw = sampled_worst_case(s.model, s.set, sol.prices, s.line.costs, 500, 1);
  EXPECT_GE(sw.worst, adversary_markup_value(s.model, s.set, s.line, sol.markup).value - 1e-12);
  EXPECT_LE(sw.worst, sw.average);
  EXPECT_LE(sw.average, sw.max);
  const auto again = sampled_worst_case(s.model, s.set, sol.prices, s.line.costs, 500, 1);
  EXPECT_EQ(sw.revenues, again.revenues);
}
