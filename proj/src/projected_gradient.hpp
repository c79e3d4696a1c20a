#pragma once

// Projected gradient descent with Barzilai-Borwein trial steps and Armijo
// backtracking, plus Dykstra's alternating projections. Internal helpers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gevprice::detail {

// f(x, grad_out) -> value.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;
using Projection = std::function<std::vector<double>(std::span<const double>)>;

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct PgOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  double first_step = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;
  double min_step = 1e-8;
  double max_step = 1e8;
  bool maximize = false;
  // Absolute slack added to the Armijo test for objectives with evaluation noise.
  double noise = 0.0;
  // A stalled line search counts as converged when the residual is below this.
  double stall_tol = 0.0;
};

struct PgResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> grad;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Residual is ||x - P(x - g)|| for the descent direction g (sign-adjusted when maximizing).
inline PgResult projected_gradient(const Objective& f, const Projection& proj, std::vector<double> x0,
                                   const PgOptions& opt) {
  const double sign = opt.maximize ? -1.0 : 1.0;
  const std::size_t n = x0.size();
  auto eval = [&](std::span<const double> x, std::vector<double>& g) {
    double v = f(x, g);
    for (auto& gi : g) gi *= sign;
    return sign * v;
  };

  PgResult res;
  std::vector<double> x = proj(x0), g(n), xn(n), gn(n), trial(n);
  double fx = eval(x, g);
  double step = opt.first_step;
  std::vector<double> s(n), y(n);

  auto residual_at = [&](const std::vector<double>& xx, const std::vector<double>& gg) {
    for (std::size_t i = 0; i < n; ++i) trial[i] = xx[i] - gg[i];
    return dist(xx, proj(trial));
  };

  int it = 0;
  double r = residual_at(x, g);
  for (; it < opt.max_iter; ++it) {
    if (r <= opt.tol) {
      res.converged = true;
      break;
    }
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fx)) + opt.noise;
    double t = std::clamp(step, opt.min_step, opt.max_step);
    bool accepted = false;
    double fn = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - t * g[i];
      xn = proj(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (xn[i] - x[i]);
      bool ok = true;
      try {
        fn = eval(xn, gn);
      } catch (...) {
        ok = false;
      }
      if (ok && std::isfinite(fn) && fn <= fx + opt.slope * decrease + noise) {
        accepted = true;
        break;
      }
      t *= opt.shrink;
    }
    if (!accepted) {
      if (r <= opt.stall_tol) res.converged = true;
      break;
    }
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
      ss += s[i] * s[i];
    }
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    r = residual_at(x, g);
    if (ss == 0.0) {
      if (r <= opt.tol) continue;
      break;
    }
    step = sy > 0.0 ? ss / sy : opt.max_step;
  }
  if (!res.converged && r <= opt.tol) res.converged = true;
  res.x = std::move(x);
  res.value = sign * fx;
  for (auto& gi : g) gi *= sign;
  res.grad = std::move(g);
  res.residual = r;
  res.iterations = it;
  return res;
}

// Projection onto the intersection of convex sets given their individual projections.
inline std::vector<double> dykstra(std::span<const double> x0, const std::vector<Projection>& sets,
                                   double tol = 1e-10, int max_cycles = 100000) {
  const std::size_t n = x0.size();
  std::vector<double> x(x0.begin(), x0.end()), prev(n), yv(n);
  std::vector<std::vector<double>> inc(sets.size(), std::vector<double>(n, 0.0));
  for (int c = 0; c < max_cycles; ++c) {
    prev = x;
    double inc_change = 0.0;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) yv[i] = x[i] + inc[j][i];
      std::vector<double> xn = sets[j](yv);
      for (std::size_t i = 0; i < n; ++i) {
        const double ni = yv[i] - xn[i];
        inc_change += (ni - inc[j][i]) * (ni - inc[j][i]);
        inc[j][i] = ni;
      }
      x.swap(xn);
    }
    if (dist(x, prev) <= tol && std::sqrt(inc_change) <= tol) break;
  }
  return x;
}

}  // namespace gevprice::detail
