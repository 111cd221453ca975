#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "spinfid/error.hpp"
#include "spinfid/io.hpp"

namespace spinfid::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

// Non-blank lines, numbered from 1.
std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    ++number;
    const std::string_view t = trim(raw);
    if (!t.empty()) out.push_back({number, t});
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Checks the magic line and column header; returns the index of the first data line.
std::size_t expect_preamble(const std::vector<Line>& lines, std::string_view magic, std::string_view header,
                            const char* what) {
  if (lines.empty()) throw ParseError(std::string("empty ") + what + " file", 1);
  if (lines[0].text.substr(0, magic.size()) != magic) {
    throw ParseError("expected '" + std::string(magic) + "' as the first line", lines[0].number);
  }
  std::size_t i = 1;
  while (i < lines.size() && lines[i].text.front() == '#') ++i;
  if (i >= lines.size()) throw ParseError("missing column header '" + std::string(header) + "'", lines.back().number);
  if (lines[i].text != header) {
    throw ParseError("expected column header '" + std::string(header) + "', got '" + std::string(lines[i].text) + "'",
                     lines[i].number);
  }
  return i + 1;
}

std::vector<std::string_view> columns(const Line& line, std::size_t expected) {
  auto cols = split(line.text, ',');
  if (cols.size() != expected) {
    throw ParseError("expected " + std::to_string(expected) + " comma-separated fields, got " +
                         std::to_string(cols.size()),
                     line.number);
  }
  return cols;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_seconds_as_ps(double seconds) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, seconds, std::chars_format::scientific);
  const std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));
  const std::size_t e = sci.find('e');
  std::string_view mant = sci.substr(0, e);
  int exponent = 0;
  const auto exp_text = sci.substr(e + 1);
  std::from_chars(exp_text.data() + (exp_text.front() == '+' ? 1 : 0), exp_text.data() + exp_text.size(), exponent);

  std::string out;
  if (!mant.empty() && mant.front() == '-') {
    out.push_back('-');
    mant.remove_prefix(1);
  }
  std::string digits;
  for (char c : mant) {
    if (c != '.') digits.push_back(c);
  }
  if (digits == "0") return out + "0";
  const int p = exponent + 12;  // value = d0.d1d2... x 10^p ps
  if (p >= 0 && p <= 15) {
    const auto int_len = static_cast<std::size_t>(p) + 1;
    if (digits.size() <= int_len) {
      out += digits + std::string(int_len - digits.size(), '0');
    } else {
      out += digits.substr(0, int_len) + "." + digits.substr(int_len);
    }
  } else if (p < 0 && p >= -6) {
    out += "0." + std::string(static_cast<std::size_t>(-p - 1), '0') + digits;
  } else {
    out += digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    out += "e" + std::to_string(p);
  }
  return out;
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("'" + std::string(text) + "' is not a number", line);
  }
  if (!std::isfinite(v)) throw ParseError("'" + std::string(text) + "' is not finite", line);
  return v;
}

double parse_ps_as_seconds(std::string_view text, std::size_t line) {
  parse_double(text, line);  // validates the token as written
  const std::size_t e = text.find_first_of("eE");
  long exponent = 0;
  std::string_view mant = text;
  if (e != std::string_view::npos) {
    mant = text.substr(0, e);
    auto exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    const auto res = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (res.ec != std::errc{} || res.ptr != exp_text.data() + exp_text.size()) {
      throw ParseError("'" + std::string(text) + "' has a malformed exponent", line);
    }
  }
  return parse_double(std::string(mant) + "e" + std::to_string(exponent - 12), line);
}

// ---------------------------------------------------------------------------
// Traces

std::string format_trace(const TraceSeries& trace) {
  std::string out(kTraceMagic);
  out += '\n';
  if (!trace.provenance().empty()) out += "# provenance: " + one_line(trace.provenance()) + "\n";
  out += "time_ps,signal\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_seconds_as_ps(trace.times()[i]);
    out += ',';
    out += format_double(trace.values()[i]);
    out += '\n';
  }
  return out;
}

TraceSeries parse_trace(std::string_view text, const std::string& source) {
  const auto lines = lines_of(text);
  const std::size_t first = expect_preamble(lines, kTraceMagic, "time_ps,signal", "trace");
  std::string provenance = source;
  for (std::size_t i = 1; i < first; ++i) {
    constexpr std::string_view tag = "# provenance: ";
    if (lines[i].text.substr(0, tag.size()) == tag) provenance = std::string(lines[i].text.substr(tag.size()));
  }
  std::vector<double> t, y;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (lines[i].text.front() == '#') continue;
    const auto cols = columns(lines[i], 2);
    const double ti = parse_ps_as_seconds(cols[0], lines[i].number);
    const double yi = parse_double(cols[1], lines[i].number);
    if (!t.empty() && !(ti > t.back())) {
      throw ValidationError("line " + std::to_string(lines[i].number) + ": time " + std::string(cols[0]) +
                            " ps is not after the previous sample (times must be strictly increasing)");
    }
    t.push_back(ti);
    y.push_back(yi);
  }
  if (t.empty()) throw ValidationError("trace " + (source.empty() ? std::string() : source + " ") + "has no samples");
  return TraceSeries(std::move(t), std::move(y), std::move(provenance));
}

TraceSeries load_trace(const std::filesystem::path& path) { return parse_trace(read_file(path), path.string()); }

void save_trace(const TraceSeries& trace, const std::filesystem::path& path) {
  write_atomic(path, format_trace(trace));
}

// ---------------------------------------------------------------------------
// Shots

std::string format_shots(const std::vector<signal::ShotRecord>& records) {
  std::string out(kShotsMagic);
  out += "\ntime_ps,left,right\n";
  for (const auto& r : records) {
    const std::string t = format_seconds_as_ps(r.delay);
    for (const auto& p : r.pairs) {
      out += t + "," + format_double(p.left_shot) + "," + format_double(p.right_shot) + "\n";
    }
  }
  return out;
}

std::vector<signal::ShotRecord> parse_shots(std::string_view text) {
  const auto lines = lines_of(text);
  const std::size_t first = expect_preamble(lines, kShotsMagic, "time_ps,left,right", "shots");
  std::vector<signal::ShotRecord> out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (lines[i].text.front() == '#') continue;
    const auto cols = columns(lines[i], 3);
    const double t = parse_ps_as_seconds(cols[0], lines[i].number);
    const signal::RawShotPair pair{parse_double(cols[1], lines[i].number), parse_double(cols[2], lines[i].number)};
    if (out.empty() || t > out.back().delay) {
      out.push_back({t, {}});
    } else if (t < out.back().delay) {
      throw ValidationError("line " + std::to_string(lines[i].number) + ": delays must be non-decreasing");
    }
    out.back().pairs.push_back(pair);
  }
  if (out.empty()) throw ValidationError("shot file has no samples");
  return out;
}

std::vector<signal::ShotRecord> load_shots(const std::filesystem::path& path) { return parse_shots(read_file(path)); }

void save_shots(const std::vector<signal::ShotRecord>& records, const std::filesystem::path& path) {
  write_atomic(path, format_shots(records));
}

// ---------------------------------------------------------------------------
// Relaxation series

std::string format_relaxation(const analysis::RelaxationSeries& series) {
  series.validate();
  std::string out(kRelaxationMagic);
  out += series.kind == analysis::RelaxationKind::t1 ? " kind=T1\n" : " kind=Tm\n";
  const bool sig = !series.sigmas.empty();
  out += sig ? "temperature_K,time_s,sigma_s\n" : "temperature_K,time_s\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out += format_double(series.temperatures[i]) + "," + format_double(series.times[i]);
    if (sig) out += "," + format_double(series.sigmas[i]);
    out += '\n';
  }
  return out;
}

analysis::RelaxationSeries parse_relaxation(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("empty relaxation file", 1);
  analysis::RelaxationSeries s;
  const auto magic = lines[0].text;
  if (magic == std::string(kRelaxationMagic) + " kind=T1") {
    s.kind = analysis::RelaxationKind::t1;
  } else if (magic == std::string(kRelaxationMagic) + " kind=Tm") {
    s.kind = analysis::RelaxationKind::tm;
  } else {
    throw ParseError("expected '" + std::string(kRelaxationMagic) + " kind=T1' or 'kind=Tm' as the first line",
                     lines[0].number);
  }
  std::size_t i = 1;
  while (i < lines.size() && lines[i].text.front() == '#') ++i;
  if (i >= lines.size()) throw ParseError("missing column header", lines.back().number);
  std::size_t ncol = 0;
  if (lines[i].text == "temperature_K,time_s") {
    ncol = 2;
  } else if (lines[i].text == "temperature_K,time_s,sigma_s") {
    ncol = 3;
  } else {
    throw ParseError("expected header 'temperature_K,time_s[,sigma_s]'", lines[i].number);
  }
  for (++i; i < lines.size(); ++i) {
    if (lines[i].text.front() == '#') continue;
    const auto cols = columns(lines[i], ncol);
    const double T = parse_double(cols[0], lines[i].number);
    const double t = parse_double(cols[1], lines[i].number);
    if (!s.temperatures.empty() && !(T > s.temperatures.back())) {
      throw ValidationError("line " + std::to_string(lines[i].number) + ": temperatures must be strictly increasing");
    }
    if (!(t > 0.0)) throw ValidationError("line " + std::to_string(lines[i].number) + ": relaxation time must be > 0");
    s.temperatures.push_back(T);
    s.times.push_back(t);
    if (ncol == 3) s.sigmas.push_back(parse_double(cols[2], lines[i].number));
  }
  if (s.times.empty()) throw ValidationError("relaxation file has no samples");
  s.validate();
  return s;
}

analysis::RelaxationSeries load_relaxation(const std::filesystem::path& path) {
  return parse_relaxation(read_file(path));
}

void save_relaxation(const analysis::RelaxationSeries& series, const std::filesystem::path& path) {
  write_atomic(path, format_relaxation(series));
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("error while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

}  // namespace spinfid::io
