#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spinfid/analysis.hpp"
#include "spinfid/signal_chain.hpp"
#include "spinfid/trace.hpp"

namespace spinfid::io {

// Trace CSV:
//
//   # spinfid-trace v1
//   time_ps,signal
//   0.5,0.9431...
//
// Times are written in picoseconds and values as the shortest decimal that
// reads back to the same double. The seconds <-> picoseconds conversion is
// done on the decimal text (exponent shift), so load(save(x)) == x bit for
// bit. Blank lines and further '#' lines are ignored.

inline constexpr std::string_view kTraceMagic = "# spinfid-trace v1";
inline constexpr std::string_view kShotsMagic = "# spinfid-shots v1";
inline constexpr std::string_view kRelaxationMagic = "# spinfid-relaxation v1";

/// Shortest round-trip decimal for a double; no locale, "nan"/"inf" never
/// produced (callers validate finiteness).
std::string format_double(double x);
/// Seconds written as picoseconds, exact.
std::string format_seconds_as_ps(double seconds);
/// Inverse of format_seconds_as_ps for any decimal text. Throws ParseError.
double parse_ps_as_seconds(std::string_view text, std::size_t line);
/// Whole-token strict double parse. Throws ParseError.
double parse_double(std::string_view text, std::size_t line);

std::string format_trace(const TraceSeries& trace);
/// Throws ParseError (malformed, with line number) or ValidationError
/// (duplicate/decreasing times naming the line, or "no samples").
TraceSeries parse_trace(std::string_view text, const std::string& source = {});

TraceSeries load_trace(const std::filesystem::path& path);
void save_trace(const TraceSeries& trace, const std::filesystem::path& path);

// Raw shots: "time_ps,left,right" rows; consecutive rows sharing a time form
// one record.
std::string format_shots(const std::vector<signal::ShotRecord>& records);
std::vector<signal::ShotRecord> parse_shots(std::string_view text);
std::vector<signal::ShotRecord> load_shots(const std::filesystem::path& path);
void save_shots(const std::vector<signal::ShotRecord>& records, const std::filesystem::path& path);

// Relaxation series: "# spinfid-relaxation v1 kind=T1" (or kind=Tm), header
// "temperature_K,time_s" with an optional third column "sigma_s".
std::string format_relaxation(const analysis::RelaxationSeries& series);
analysis::RelaxationSeries parse_relaxation(std::string_view text);
analysis::RelaxationSeries load_relaxation(const std::filesystem::path& path);
void save_relaxation(const analysis::RelaxationSeries& series, const std::filesystem::path& path);

/// Reads a whole file. Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes `<path>.tmp` then renames over `path`. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// ---------------------------------------------------------------------------
// SVG plots

enum class SeriesStyle { points, line };

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  SeriesStyle style = SeriesStyle::line;
};

struct PlotPanel {
  std::string title;
  std::string x_label;  // include the unit, e.g. "delay (ps)"
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Self-contained SVG with axes, ticks, labels and a legend. Output depends
/// only on the input. Throws ValidationError if there is nothing to draw.
std::string render_svg(const PlotPanel& panel);
void emit_plot(const PlotPanel& panel, const std::filesystem::path& path);

}  // namespace spinfid::io
