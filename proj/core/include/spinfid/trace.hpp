#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spinfid {

/// Ordered (delay, signal) samples. Times are in seconds and strictly
/// increasing; values are finite. An empty series is valid (it is how
/// deadtime truncation reports "nothing left").
class TraceSeries {
 public:
  TraceSeries() = default;

  /// Throws ValidationError if lengths differ, a value is non-finite, or
  /// times are not strictly increasing.
  TraceSeries(std::vector<double> times, std::vector<double> values, std::string provenance = {});

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  /// Half-open index range [first, last) of samples with t_start <= t <= t_end.
  std::pair<std::size_t, std::size_t> window_indices(double t_start, double t_end) const;

  /// Copy of the samples inside [t_start, t_end].
  TraceSeries window(double t_start, double t_end) const;

  friend bool operator==(const TraceSeries& a, const TraceSeries& b) {
    return a.times_ == b.times_ && a.values_ == b.values_;
  }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::string provenance_;
};

/// Uniform grid start, start + step, ... up to and including stop (within
/// half a step). Each point is computed as start + i * step.
std::vector<double> uniform_grid(double start, double stop, double step);

}  // namespace spinfid
