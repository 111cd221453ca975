#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spinfid/trace.hpp"

namespace spinfid::testing {

/// Samples f on start, start + step, ... stop.
inline TraceSeries sample(const std::function<double(double)>& f, double start, double stop, double step) {
  std::vector<double> t = uniform_grid(start, stop, step);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = f(t[i]);
  return TraceSeries(std::move(t), std::move(y));
}

inline TraceSeries add_noise(const TraceSeries& trace, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> y(trace.values().begin(), trace.values().end());
  for (double& v : y) v += n(rng);
  return TraceSeries({trace.times().begin(), trace.times().end()}, std::move(y));
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double stddev(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("spinfid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace spinfid::testing
