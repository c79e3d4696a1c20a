#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "gevprice/errors.hpp"
#include "gevprice/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace gevprice;

namespace {

MixtureUncertaintySet three_types(double eps) {
  std::vector<ChoiceParams> anchors{{{0.0, 1.0}, {1.0, 1.0}}, {{1.0, 0.5}, {2.0, 2.0}}, {{2.0, -1.0}, {0.5, 0.5}}};
  return MixtureUncertaintySet(anchors, {1.0 / 3, 1.0 / 3, 1.0 / 3}, eps, SetMode::joint);
}

MixtureUncertaintySet random_set(Rng& rng, std::size_t K, double eps, std::size_t m = 3) {
  std::uniform_real_distribution<double> u(-1.0, 2.0), ub(0.5, 2.0);
  std::exponential_distribution<double> ex(1.0);
  std::vector<ChoiceParams> anchors(K);
  for (auto& w : anchors) {
    const double b = ub(rng);
    for (std::size_t i = 0; i < m; ++i) w.a.push_back(u(rng)), w.b.push_back(b);
  }
  std::vector<double> tau(K);
  double s = 0.0;
  for (auto& t : tau) s += (t = ex(rng));
  for (auto& t : tau) t /= s;
  return MixtureUncertaintySet(anchors, tau, eps, SetMode::joint);
}

}  // namespace

TEST(Uncertainty, ParamsAtExamples) {
  const auto set = three_types(1.0);
  const std::vector<double> e1{1.0, 0.0, 0.0};
  const auto p = set.params_at(e1);
  EXPECT_EQ(p.a, set.anchors()[0].a);
  EXPECT_EQ(p.b, set.anchors()[0].b);
  const auto mean = set.mean_params();
  const auto ref = oracle::mix(set, set.tau());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(mean.a[i], ref.a[i], 1e-15);

  MixtureUncertaintySet two({{{0.0}, {1.0}}, {{2.0}, {1.0}}}, {0.5, 0.5}, 0.5, SetMode::joint);
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(two.params_at(half).a[0], 1.0);
}

TEST(Uncertainty, ParamsAtIsAffine) {
  Rng rng(21);
  const auto set = random_set(rng, 4, 0.3);
  for (int c = 0; c < 200; ++c) {
    const auto l1 = set.sample_lambda(rng), l2 = set.sample_lambda(rng);
    std::vector<double> mid(4);
    for (std::size_t k = 0; k < 4; ++k) mid[k] = 0.5 * l1[k] + 0.5 * l2[k];
    const auto pm = set.params_at(mid), p1 = set.params_at(l1), p2 = set.params_at(l2);
    for (std::size_t i = 0; i < set.size(); ++i) {
      EXPECT_NEAR(pm.a[i], 0.5 * p1.a[i] + 0.5 * p2.a[i], 1e-14);
      EXPECT_NEAR(pm.b[i], 0.5 * p1.b[i] + 0.5 * p2.b[i], 1e-14);
    }
    EXPECT_TRUE(pm.homogeneous());
  }
}

TEST(Uncertainty, RejectsInfeasibleLambda) {
  const auto set = three_types(0.1);
  const std::vector<double> far{1.0, 0.0, 0.0};
  EXPECT_THROW(set.params_at(far), DomainError);
  EXPECT_FALSE(set.feasible(far));
}

TEST(Uncertainty, RejectsHeterogeneousAnchors) {
  std::vector<ChoiceParams> anchors{{{0.0, 0.0}, {1.0, 2.0}}};
  EXPECT_THROW(MixtureUncertaintySet(anchors, {1.0}, 0.0, SetMode::joint), ConfigError);
  EXPECT_NO_THROW(MixtureUncertaintySet(anchors, {1.0}, 0.0, SetMode::partition, {{0}, {1}}));
  EXPECT_THROW(MixtureUncertaintySet(anchors, {0.5}, 0.0, SetMode::partition, {{0}, {1}}), ConfigError);
}

TEST(Uncertainty, BoundsGreedyExample) {
  MixtureUncertaintySet set({{{0.0}, {1.0}}, {{1.0}, {1.0}}, {{2.0}, {1.0}}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.1,
                            SetMode::joint);
  const auto bd = set.bounds();
  EXPECT_NEAR(bd.a_hi[0], 1.2, 1e-14);
  EXPECT_NEAR(bd.a_lo[0], 0.8, 1e-14);
  const std::vector<double> v{0.0, 1.0, 2.0};
  const auto [mn, mx] = oracle::grid_extremes(set.lambda_lo(), set.lambda_hi(), v, 1.0 / 3000);
  EXPECT_NEAR(bd.a_hi[0], mx, 1e-9);
  EXPECT_NEAR(bd.a_lo[0], mn, 1e-9);
}

TEST(Uncertainty, BoundsMatchGridOracle) {
  Rng rng(22);
  for (int c = 0; c < 20; ++c) {
    const auto set = random_set(rng, 3, 0.05 + 0.05 * (c % 6));
    const auto bd = set.bounds();
    for (std::size_t i = 0; i < set.size(); ++i) {
      std::vector<double> v(3);
      for (std::size_t k = 0; k < 3; ++k) v[k] = set.anchors()[k].a[i];
      const auto [mn, mx] = oracle::grid_extremes(set.lambda_lo(), set.lambda_hi(), v, 1e-3);
      EXPECT_LE(bd.a_lo[i], mn + 1e-12);
      EXPECT_GE(bd.a_hi[i], mx - 1e-12);
      EXPECT_NEAR(bd.a_lo[i], mn, 1e-2);
      EXPECT_NEAR(bd.a_hi[i], mx, 1e-2);
    }
  }
}

TEST(Uncertainty, BoundsDegenerateCases) {
  Rng rng(23);
  const auto set0 = random_set(rng, 4, 0.0);
  const auto bd0 = set0.bounds();
  const auto mean = set0.mean_params();
  for (std::size_t i = 0; i < set0.size(); ++i) {
    EXPECT_NEAR(bd0.a_lo[i], mean.a[i], 1e-14);
    EXPECT_NEAR(bd0.a_hi[i], mean.a[i], 1e-14);
  }
  const auto set1 = set0.with_eps(1.0);
  const auto bd1 = set1.bounds();
  for (std::size_t i = 0; i < set1.size(); ++i) {
    double mn = 1e300, mx = -1e300;
    for (const auto& w : set1.anchors()) mn = std::min(mn, w.a[i]), mx = std::max(mx, w.a[i]);
    EXPECT_NEAR(bd1.a_lo[i], mn, 1e-14);
    EXPECT_NEAR(bd1.a_hi[i], mx, 1e-14);
  }
}

TEST(Uncertainty, BoundsSandwichSamples) {
  Rng rng(24);
  const auto set = random_set(rng, 5, 0.2, 4);
  const auto bd = set.bounds();
  for (const auto& s : set.sample_many(7, stream::kEvaluation, 1000)) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      EXPECT_LE(bd.a_lo[i], s.params.a[i] + 1e-12);
      EXPECT_GE(bd.a_hi[i], s.params.a[i] - 1e-12);
      EXPECT_LE(bd.b_lo[i], s.params.b[i] + 1e-12);
      EXPECT_GE(bd.b_hi[i], s.params.b[i] - 1e-12);
    }
  }
}

TEST(Uncertainty, ProjectionExamples) {
  const auto set = three_types(1.0);
  const std::vector<double> v{2.0, 0.0, 0.0};
  const auto p = set.project(v);
  EXPECT_NEAR(p[0], 1.0, 1e-14);
  EXPECT_NEAR(p[1], 0.0, 1e-14);
  const auto set2 = three_types(0.2);
  const std::vector<double> inside{0.3, 0.4, 0.3};
  const auto q = set2.project(inside);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(q[k], inside[k], 1e-15);
}

TEST(Uncertainty, ProjectionMatchesActiveSetOracle) {
  Rng rng(25);
  std::normal_distribution<double> n(0.25, 0.5);
  for (int c = 0; c < 300; ++c) {
    const auto set = random_set(rng, 4, 0.2);
    std::vector<double> v(4);
    for (auto& x : v) x = n(rng);
    const auto p = set.project(v);
    const auto ref = oracle::active_set_projection(v, set.lambda_lo(), set.lambda_hi());
    ASSERT_EQ(ref.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(p[k], ref[k], 1e-8);
    EXPECT_TRUE(set.feasible(p, 1e-12));
  }
}

TEST(Uncertainty, ProjectionIsNearestAmongSamples) {
  Rng rng(26);
  const auto set = random_set(rng, 3, 0.25);
  std::normal_distribution<double> n(0.3, 0.6);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(set.sample_lambda(rng));
  for (int c = 0; c < 10; ++c) {
    std::vector<double> v(3);
    for (auto& x : v) x = n(rng);
    const auto p = set.project(v);
    double dp = 0.0;
    for (std::size_t k = 0; k < 3; ++k) dp += (p[k] - v[k]) * (p[k] - v[k]);
    dp = std::sqrt(dp);
    for (const auto& q : pts) {
      double d = 0.0;
      for (std::size_t k = 0; k < 3; ++k) d += (q[k] - v[k]) * (q[k] - v[k]);
      EXPECT_GE(std::sqrt(d), dp - 1e-8);
    }
  }
}

TEST(Uncertainty, VerticesAreFeasibleAndExtreme) {
  Rng rng(27);
  const auto set = random_set(rng, 4, 0.15);
  const auto& vs = set.vertices();
  ASSERT_FALSE(vs.empty());
  for (const auto& v : vs) EXPECT_TRUE(set.feasible(v, 1e-12));
  // every linear objective attains its max over samples at or below the best vertex
  std::normal_distribution<double> n(0.0, 1.0);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> w(4);
    for (auto& x : w) x = n(rng);
    double vbest = -1e300;
    for (const auto& v : vs) vbest = std::max(vbest, std::inner_product(v.begin(), v.end(), w.begin(), 0.0));
    for (int i = 0; i < 200; ++i) {
      const auto l = set.sample_lambda(rng);
      EXPECT_LE(std::inner_product(l.begin(), l.end(), w.begin(), 0.0), vbest + 1e-12);
    }
  }
}

TEST(Uncertainty, SamplingDegenerateAndUniform) {
  Rng rng(28);
  const auto set = random_set(rng, 3, 0.0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(set.sample_lambda(rng), set.tau());

  MixtureUncertaintySet two({{{0.0}, {1.0}}, {{1.0}, {1.0}}}, {0.3, 0.7}, 1.0, SetMode::joint);
  double mean = 0.0;
  for (int i = 0; i < 10000; ++i) mean += two.sample_lambda(rng)[0];
  EXPECT_NEAR(mean / 10000, 0.5, 0.02);
}

TEST(Uncertainty, SamplingSymmetricMeans) {
  const auto set = three_types(0.2);
  const auto draws = set.sample_many(3, stream::kEvaluation, 100000);
  std::vector<double> mean(3, 0.0);
  for (const auto& d : draws) {
    for (std::size_t k = 0; k < 3; ++k) mean[k] += d.lambdas[0][k];
    ASSERT_TRUE(set.feasible(d.lambdas[0], 1e-12));
  }
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(mean[k] / 100000, 1.0 / 3, 0.01);
}

TEST(Uncertainty, SamplingIsUniformOnPolytope) {
  // box-constrained 2-simplex: compare the fraction in a sub-region with its area share
  const auto set = three_types(0.25);
  const auto draws = set.sample_many(4, stream::kEvaluation, 40000);
  std::size_t inside = 0;
  for (const auto& d : draws) inside += d.lambdas[0][0] < 1.0 / 3;
  const auto grid = oracle::lambda_grid(set.lambda_lo(), set.lambda_hi(), 1.0 / 600);
  std::size_t ginside = 0;
  for (const auto& l : grid) ginside += l[0] < 1.0 / 3;
  EXPECT_NEAR(static_cast<double>(inside) / draws.size(), static_cast<double>(ginside) / grid.size(), 0.015);
}

TEST(Uncertainty, SampleManyIsReproducible) {
  Rng rng(29);
  const auto set = random_set(rng, 5, 0.2);
  const auto a = set.sample_many(99, stream::kEvaluation, 50);
  const auto b = set.sample_many(99, stream::kEvaluation, 50);
  const auto c = set.sample_many(100, stream::kEvaluation, 50);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(a[i].lambdas, b[i].lambdas);
    EXPECT_EQ(a[i].params.a, b[i].params.a);
  }
  EXPECT_NE(a[0].lambdas, c[0].lambdas);
}

TEST(Uncertainty, PartitionModeDrawsIndependentBlocks) {
  std::vector<ChoiceParams> anchors{{{0.0, 0.0}, {1.0, 2.0}}, {{1.0, 1.0}, {1.5, 0.5}}};
  MixtureUncertaintySet set(anchors, {0.5, 0.5}, 0.3, SetMode::partition, {{0}, {1}});
  EXPECT_EQ(set.blocks(), 2u);
  const auto draws = set.sample_many(5, stream::kEvaluation, 200);
  std::size_t differ = 0;
  for (const auto& d : draws) {
    ASSERT_EQ(d.lambdas.size(), 2u);
    differ += std::fabs(d.lambdas[0][0] - d.lambdas[1][0]) > 1e-9;
    EXPECT_TRUE(d.params.partition_homogeneous({{0}, {1}}));
    EXPECT_NEAR(d.params.a[0], d.lambdas[0][1], 1e-14);
    EXPECT_NEAR(d.params.a[1], d.lambdas[1][1], 1e-14);
  }
  EXPECT_GT(differ, 190u);
}

TEST(Uncertainty, RejectsTooManyVertices) {
  Rng rng(30);
  const auto set = random_set(rng, 13, 0.05);
  EXPECT_THROW(set.vertices(), ConfigError);
}
