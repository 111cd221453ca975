#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spinfid/fit.hpp"

namespace spinfid::testing {

// Random but physically sensible parameter vectors for each model, plus the
// time span over which the model is interesting (a few time constants).
struct ModelDraw {
  std::vector<double> params;
  double span = 0.0;
};

inline ModelDraw draw_parameters(fit::ModelId id, std::mt19937_64& rng, bool free_stretch = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * u(rng); };
  switch (id) {
    case fit::ModelId::damped_cosine: {
      const double t2 = between(4e-12, 25e-12);
      return {{between(0.3, 3.0) * (u(rng) < 0.5 ? -1.0 : 1.0), t2, 2.0 * std::numbers::pi * between(20e9, 130e9),
               between(-2.5, 2.5)},
              3.0 * t2};
    }
    case fit::ModelId::exponential: {
      const double tau = between(1e-12, 50e-12);
      return {{between(0.2, 5.0), tau}, 4.0 * tau};
    }
    case fit::ModelId::inversion_recovery: {
      const double t1 = between(1e-6, 1e-3);
      const double i_inf = between(0.5, 3.0);
      return {{i_inf, i_inf * between(1.2, 2.0), t1}, 5.0 * t1};
    }
    case fit::ModelId::hahn_echo: {
      const double tm = between(0.5e-6, 5e-6);
      return {{between(0.5, 3.0), tm, free_stretch ? between(0.6, 2.5) : 1.0}, 3.0 * tm};
    }
  }
  return {};
}

// Worst relative disagreement between the analytic gradient and a central
// difference with step 1e-6 relative, over `n_times` points in [0, span].
// Each partial is compared in scaled form (d f / d ln p); the denominator is
// floored at 1e-3 of the model's amplitude so sign changes of the model do
// not produce 0/0.
inline double worst_gradient_error(fit::ModelId id, const std::vector<double>& p, double span, int n_times = 25) {
  const std::size_t np = p.size();
  double amp = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    if (fit::parameter_info(id)[k].kind == fit::ParamKind::amplitude) amp = std::max(amp, std::abs(p[k]));
  }
  std::vector<double> g(np), q(p);
  double worst = 0.0;
  for (int i = 0; i < n_times; ++i) {
    const double t = span * (i + 0.5) / n_times;
    fit::gradient(id, t, p, g);
    for (std::size_t k = 0; k < np; ++k) {
      const double scale = std::max(std::abs(p[k]), fit::parameter_info(id)[k].kind == fit::ParamKind::angle ? 1.0 : 0.0);
      const double h = 1e-6 * scale;
      q = p;
      q[k] = p[k] + h;
      const double up = fit::evaluate(id, t, q);
      q[k] = p[k] - h;
      const double down = fit::evaluate(id, t, q);
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max(std::abs(g[k] * scale), 1e-3 * amp);
      worst = std::max(worst, std::abs(g[k] - fd) * scale / denom);
    }
  }
  return worst;
}

}  // namespace spinfid::testing
