#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "gevprice/gev.hpp"
#include "gevprice/rng.hpp"
#include "gevprice/uncertainty.hpp"

namespace cases {

struct Small {
  gevprice::GevModel model;
  gevprice::MixtureUncertaintySet set;
  gevprice::ProductLine line;
};

// N partitions of `per` products, one nest per partition. N = 1 with joint
// mode gives a homogeneous instance.
inline Small small_instance(std::uint64_t seed, std::size_t N, std::size_t per, std::size_t K, double eps,
                            bool nested, bool joint = false) {
  using namespace gevprice;
  Rng rng(seed);
  std::uniform_real_distribution<double> ua(0.0, 2.0), ub(0.5, 2.0), uc(0.5, 2.0), umu(1.0, 2.0);
  const std::size_t m = N * per;
  ProductLine line;
  for (std::size_t n = 0; n < N; ++n) {
    line.partitions.emplace_back();
    for (std::size_t j = 0; j < per; ++j) line.partitions.back().push_back(n * per + j);
  }
  for (std::size_t i = 0; i < m; ++i) line.costs.push_back(uc(rng));
  std::vector<ChoiceParams> anchors(K);
  for (auto& w : anchors) {
    for (std::size_t i = 0; i < m; ++i) w.a.push_back(ua(rng));
    w.b.resize(m);
    const double bj = ub(rng);
    for (const auto& part : line.partitions) {
      const double b = joint ? bj : ub(rng);
      for (std::size_t i : part) w.b[i] = b;
    }
  }
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> tau(K);
  double s = 0.0;
  for (auto& t : tau) s += (t = ex(rng));
  for (auto& t : tau) t /= s;
  GevModel model = GevModel::mnl(m);
  if (nested) {
    std::vector<Nest> nests;
    for (const auto& part : line.partitions) nests.push_back(Nest{part, umu(rng), {}});
    model = GevModel::nested(m, std::move(nests));
  }
  auto set = joint ? MixtureUncertaintySet(anchors, tau, eps, SetMode::joint)
                   : MixtureUncertaintySet(anchors, tau, eps, SetMode::partition, line.partitions);
  return {model, set, line};
}

}  // namespace cases
