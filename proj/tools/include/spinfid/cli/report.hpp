#pragma once

#include <string>
#include <string_view>

#include "spinfid/analysis.hpp"
#include "spinfid/cli/config.hpp"
#include "spinfid/fit.hpp"

namespace spinfid::cli {

/// Finite numbers as-is, anything else as null.
Json number_or_null(double x);

Json fit_to_json(const fit::FitResult& r);
Json estimate_to_json(const analysis::Estimate& e);
Json line_to_json(const analysis::LineFit& f);

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Canonical report text: two-space indented JSON plus a trailing newline.
std::string dump_report(const Json& report);

}  // namespace spinfid::cli
