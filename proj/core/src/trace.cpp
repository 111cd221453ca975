#include "spinfid/trace.hpp"

#include <algorithm>
#include <cmath>

#include "spinfid/error.hpp"

namespace spinfid {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::range: return "range";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::io: return "io";
    case ErrorCategory::fit: return "fit";
    case ErrorCategory::guess: return "guess";
  }
  return "unknown";
}

TraceSeries::TraceSeries(std::vector<double> times, std::vector<double> values, std::string provenance)
    : times_(std::move(times)), values_(std::move(values)), provenance_(std::move(provenance)) {
  if (times_.size() != values_.size()) {
    throw ValidationError("trace has " + std::to_string(times_.size()) + " times but " +
                          std::to_string(values_.size()) + " values");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
      throw ValidationError("trace sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("trace times must be strictly increasing (sample " + std::to_string(i) + ")");
    }
  }
}

std::pair<std::size_t, std::size_t> TraceSeries::window_indices(double t_start, double t_end) const {
  const auto first = std::lower_bound(times_.begin(), times_.end(), t_start);
  const auto last = std::upper_bound(first, times_.end(), t_end);
  return {static_cast<std::size_t>(first - times_.begin()), static_cast<std::size_t>(last - times_.begin())};
}

TraceSeries TraceSeries::window(double t_start, double t_end) const {
  const auto [first, last] = window_indices(t_start, t_end);
  return TraceSeries({times_.begin() + first, times_.begin() + last},
                     {values_.begin() + first, values_.begin() + last}, provenance_);
}

std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
    throw DomainError("uniform_grid: need finite start <= stop and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

}  // namespace spinfid
