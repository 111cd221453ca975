#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>

#include "spinfid/error.hpp"
#include "spinfid/io.hpp"
#include "test_support.hpp"

namespace {

using namespace spinfid::io;
using spinfid::TraceSeries;

// Random finite doubles over many magnitudes, including subnormal-ish ones.
double random_double(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> exp(-300, 300);
  return std::ldexp(mant(rng), exp(rng));
}

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20000; ++i) {
    const double x = random_double(rng);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_double(format_double(x), 1)), std::bit_cast<std::uint64_t>(x));
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Numbers, PicosecondShiftIsExact) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    const double s = random_double(rng);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_ps_as_seconds(format_seconds_as_ps(s), 1)),
              std::bit_cast<std::uint64_t>(s))
        << format_seconds_as_ps(s);
  }
  EXPECT_EQ(format_seconds_as_ps(8.6e-12), "8.6");
  EXPECT_EQ(format_seconds_as_ps(0.5e-12), "0.5");
  EXPECT_EQ(parse_ps_as_seconds("0.01", 1), 0.01e-12);
  EXPECT_EQ(parse_ps_as_seconds("-2.5e3", 1), -2.5e-9);
}

TEST(Numbers, StrictParse) {
  EXPECT_THROW(parse_double("1.0x", 3), spinfid::ParseError);
  EXPECT_THROW(parse_double("", 3), spinfid::ParseError);
  EXPECT_THROW(parse_double("nan", 3), spinfid::ParseError);
  EXPECT_THROW(parse_ps_as_seconds("1e", 3), spinfid::ParseError);
  try {
    parse_double(" 1", 42);
    FAIL();
  } catch (const spinfid::ParseError& e) {
    EXPECT_EQ(e.line(), 42u);
  }
}

TEST(TraceFile, RoundTripBitExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(1e-16, 1e-12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t, y;
    double now = -5e-12 + step(rng);
    for (int i = 0; i < 200; ++i) {
      t.push_back(now);
      y.push_back(random_double(rng));
      now += step(rng);
    }
    const TraceSeries tr(t, y, "random");
    EXPECT_EQ(parse_trace(format_trace(tr)), tr);
  }
  const auto dir = spinfid::testing::scratch_dir("io_roundtrip");
  const TraceSeries tr({0.0, 0.01e-12, 70e-12}, {1.0, -0.3333333333333333, 1e-300});
  save_trace(tr, dir / "t.csv");
  EXPECT_EQ(load_trace(dir / "t.csv"), tr);
  EXPECT_FALSE(std::filesystem::exists(dir / "t.csv.tmp"));
}

TEST(TraceFile, Layout) {
  const TraceSeries tr({0.5e-12, 1e-12}, {0.25, -1.0}, "unit test");
  const auto text = format_trace(tr);
  EXPECT_EQ(text.rfind("# spinfid-trace v1\n", 0), 0u);
  EXPECT_NE(text.find("time_ps,signal\n0.5,0.25\n1,-1\n"), std::string::npos);
  EXPECT_EQ(parse_trace(text).provenance(), "unit test");
}

TEST(TraceFile, Errors) {
  EXPECT_THROW(parse_trace(""), spinfid::ParseError);
  EXPECT_THROW(parse_trace("time_ps,signal\n1,2\n"), spinfid::ParseError);
  EXPECT_THROW(parse_trace("# spinfid-trace v1\ntime,signal\n1,2\n"), spinfid::ParseError);
  try {
    parse_trace("# spinfid-trace v1\ntime_ps,signal\n1,2\n2,abc\n");
    FAIL();
  } catch (const spinfid::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  try {
    parse_trace("# spinfid-trace v1\ntime_ps,signal\n1,2,3\n");
    FAIL();
  } catch (const spinfid::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_trace("# spinfid-trace v1\ntime_ps,signal\n1,2\n\n1,3\n");
    FAIL();
  } catch (const spinfid::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
  try {
    parse_trace("# spinfid-trace v1\ntime_ps,signal\n", "empty.csv");
    FAIL();
  } catch (const spinfid::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
  }
  EXPECT_THROW(load_trace("/nonexistent/dir/x.csv"), spinfid::IoError);
}

TEST(ShotsFile, RoundTrip) {
  std::vector<spinfid::signal::ShotRecord> recs(3);
  std::mt19937_64 rng(4);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].delay = static_cast<double>(i) * 0.25e-12;
    for (int k = 0; k < 5; ++k) recs[i].pairs.push_back({random_double(rng), random_double(rng)});
  }
  const auto back = parse_shots(format_shots(recs));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].delay, recs[i].delay);
    ASSERT_EQ(back[i].pairs.size(), 5u);
    for (int k = 0; k < 5; ++k) {
      EXPECT_EQ(back[i].pairs[k].left_shot, recs[i].pairs[k].left_shot);
      EXPECT_EQ(back[i].pairs[k].right_shot, recs[i].pairs[k].right_shot);
    }
  }
  EXPECT_THROW(parse_shots("# spinfid-shots v1\ntime_ps,left,right\n"), spinfid::ValidationError);
}

TEST(RelaxationFile, RoundTrip) {
  spinfid::analysis::RelaxationSeries s;
  s.kind = spinfid::analysis::RelaxationKind::tm;
  s.temperatures = {5.0, 12.0, 20.0};
  s.times = {1e-3, 3.3e-5, 1.7e-6};
  s.sigmas = {1e-5, 1e-6, 1e-7};
  const auto back = parse_relaxation(format_relaxation(s));
  EXPECT_EQ(back.kind, s.kind);
  EXPECT_EQ(back.temperatures, s.temperatures);
  EXPECT_EQ(back.times, s.times);
  EXPECT_EQ(back.sigmas, s.sigmas);
  const auto plain = parse_relaxation("# spinfid-relaxation v1 kind=T1\ntemperature_K,time_s\n10,1e-3\n20,1e-4\n");
  EXPECT_EQ(plain.kind, spinfid::analysis::RelaxationKind::t1);
  EXPECT_TRUE(plain.sigmas.empty());
  EXPECT_THROW(parse_relaxation("# spinfid-relaxation v1 kind=T3\ntemperature_K,time_s\n10,1\n"),
               spinfid::ParseError);
  EXPECT_THROW(parse_relaxation("# spinfid-relaxation v1 kind=T1\ntemperature_K,time_s\n10,1\n9,1\n"),
               spinfid::ValidationError);
}

TEST(Files, AtomicWriteAndRead) {
  const auto dir = spinfid::testing::scratch_dir("io_atomic");
  write_atomic(dir / "a.txt", "hello");
  write_atomic(dir / "a.txt", "world");
  EXPECT_EQ(read_file(dir / "a.txt"), "world");
  EXPECT_THROW(read_file(dir / "missing.txt"), spinfid::IoError);
  EXPECT_THROW(write_atomic(dir / "no" / "such" / "dir.txt", "x"), spinfid::IoError);
}

PlotPanel demo_panel() {
  PlotPanel p;
  p.title = "FID <test> & more";
  p.x_label = "delay (ps)";
  p.y_label = "signal";
  PlotSeries data{"data", {}, {}, SeriesStyle::points};
  PlotSeries fit{"fit", {}, {}, SeriesStyle::line};
  for (int i = 0; i < 100; ++i) {
    data.x.push_back(i * 0.3);
    data.y.push_back(std::exp(-i * 0.03) * std::cos(i * 0.5));
    fit.x.push_back(i * 0.3);
    fit.y.push_back(std::exp(-i * 0.03) * std::cos(i * 0.5) * 0.98);
  }
  p.series = {data, fit};
  return p;
}

TEST(Svg, DeterministicAndWellFormed) {
  const auto a = render_svg(demo_panel());
  const auto b = render_svg(demo_panel());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0) == 0 || a.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("delay (ps)"), std::string::npos);
  EXPECT_NE(a.find("&lt;test&gt; &amp; more"), std::string::npos);
  EXPECT_EQ(a.find("<test>"), std::string::npos);
  EXPECT_NE(a.find("fit"), std::string::npos);
}

TEST(Svg, Errors) {
  PlotPanel empty;
  empty.title = "nothing";
  EXPECT_THROW(render_svg(empty), spinfid::ValidationError);
  PlotPanel bad = demo_panel();
  bad.series[0].y.pop_back();
  EXPECT_THROW(render_svg(bad), spinfid::ValidationError);
}

TEST(Svg, FlatSeriesStillRenders) {
  PlotPanel p;
  p.title = "flat";
  p.series = {{"c", {1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}, SeriesStyle::line}};
  EXPECT_NO_THROW(render_svg(p));
  p.series = {{"one", {1.0}, {5.0}, SeriesStyle::points}};
  EXPECT_NO_THROW(render_svg(p));
}

}  // namespace
