#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "spinfid/cli/app.hpp"
#include "spinfid/cli/config.hpp"
#include "spinfid/cli/report.hpp"
#include "spinfid/error.hpp"
#include "spinfid/io.hpp"
#include "test_support.hpp"

namespace {

using namespace spinfid::cli;
namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spinfid");
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

Json report(const fs::path& p) { return Json::parse(spinfid::io::read_file(p)); }

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const Json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)).dump(), j.dump());
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(parse_config(R"({"experiment": {"feild_t": 5}})"), spinfid::ValidationError);
  EXPECT_THROW(parse_config(R"({"seeed": 1})"), spinfid::ValidationError);
  EXPECT_THROW(parse_config(R"({"experiment": {"field_t": "five"}})"), spinfid::ValidationError);
}

TEST(Config, SyntaxErrorHasLine) {
  try {
    parse_config("{\n  \"seed\": 1,\n  oops\n}");
    FAIL();
  } catch (const spinfid::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Config, PartialOverridesKeepDefaults) {
  const auto c = parse_config(R"({"experiment": {"field_t": 3.5}, "seed": 9})");
  EXPECT_EQ(c.experiment.field_t, 3.5);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.experiment.g_iso, RunConfig{}.experiment.g_iso);
  const auto exp = c.experiment_config();
  EXPECT_EQ(exp.rng_seed, 9u);
  EXPECT_EQ(exp.noise.rng_seed, 10u);
  EXPECT_EQ(c.modulation_config().rng_seed, 11u);
}

TEST(Config, PhysicsValidation) {
  EXPECT_THROW(parse_config(R"({"experiment": {"field_t": -1}})"), spinfid::Error);
  EXPECT_THROW(parse_config(R"({"experiment": {"glycerol_mass_fraction": 0.9}})"), spinfid::RangeError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"h2o.json", "d2o.json", "glycerol40.json", "shots_5t.json"}) {
    EXPECT_NO_THROW(load_config(fs::path(SPINFID_SOURCE_DIR) / "configs" / name)) << name;
  }
}

TEST(Report, SerializeParseSerializeIdentical) {
  Json j;
  j["a"] = 0.1;
  j["b"] = 8.6e-12;
  j["c"] = Json::array({1.0 / 3.0, -2.5e-300, 7});
  j["d"] = number_or_null(NAN);
  const std::string once = dump_report(j);
  EXPECT_EQ(dump_report(Json::parse(once)), once);
}

TEST(Report, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitError);
  const auto bad = run({"frobnicate"});
  EXPECT_EQ(bad.code, kExitError);
  EXPECT_NE(bad.err.find("ERROR[validation]"), std::string::npos);
  const auto missing = run({"fit", "/nonexistent/trace.csv"});
  EXPECT_EQ(missing.code, kExitError);
  EXPECT_NE(missing.err.find("ERROR[io]"), std::string::npos);
  const auto cfg = run({"simulate", "--config", "/nonexistent/cfg.json"});
  EXPECT_NE(cfg.err.find("ERROR[io]"), std::string::npos);
}

TEST(Cli, SimulateThenFit) {
  const auto dir = spinfid::testing::scratch_dir("cli_simfit");
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--threads", "1"}).code, kExitOk);
  ASSERT_TRUE(fs::exists(dir / "simulate.csv"));
  ASSERT_TRUE(fs::exists(dir / "simulate.json"));
  ASSERT_TRUE(fs::exists(dir / "simulate.trace.svg"));
  const Json sim = report(dir / "simulate.json");
  EXPECT_EQ(sim["command"], "simulate");
  EXPECT_EQ(sim["config"], config_to_json(RunConfig{}));
  const auto f = run({"fit", (dir / "simulate.csv").string(), "--out", dir.string(), "--field", "0"});
  ASSERT_EQ(f.code, kExitOk) << f.err;
  const Json fr = report(dir / "fit.json");
  EXPECT_NEAR(fr["result"]["summary"]["t2star_ps"].get<double>(), 8.60, 8.60 * 0.02);
  EXPECT_EQ(fr["inputs"][0]["sha256"], sha256_hex(spinfid::io::read_file(dir / "simulate.csv")));
  EXPECT_TRUE(fr["result"]["fit"]["converged"].get<bool>());
}

TEST(Cli, ReportReproducesFromEmbeddedConfig) {
  const auto dir = spinfid::testing::scratch_dir("cli_reproduce");
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--stem", "a", "--field", "2", "--seed", "5", "--no-svg"}).code,
            kExitOk);
  const Json a = report(dir / "a.json");
  spinfid::io::write_atomic(dir / "embedded.json", a["config"].dump(2));
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--stem", "b", "--config", (dir / "embedded.json").string(),
                 "--no-svg"})
                .code,
            kExitOk);
  EXPECT_EQ(spinfid::io::read_file(dir / "a.csv"), spinfid::io::read_file(dir / "b.csv"));
  EXPECT_EQ(report(dir / "b.json")["config"], a["config"]);
}

TEST(Cli, SweepFieldRecoversG) {
  const auto dir = spinfid::testing::scratch_dir("cli_sweep");
  ASSERT_EQ(run({"sweep-field", "--out", dir.string(), "--no-svg"}).code, kExitOk);
  const Json r = report(dir / "sweep-field.json");
  EXPECT_NEAR(r["result"]["g"]["value"].get<double>(), 1.74, 0.02);
}

TEST(Cli, FitNonConvergenceExitsTwo) {
  const auto dir = spinfid::testing::scratch_dir("cli_noconv");
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--no-svg"}).code, kExitOk);
  spinfid::io::write_atomic(dir / "cfg.json", R"({"fit": {"max_iterations": 1}})");
  const auto r = run({"fit", (dir / "simulate.csv").string(), "--out", dir.string(), "--config",
                      (dir / "cfg.json").string(), "--no-svg"});
  EXPECT_EQ(r.code, kExitNotConverged);
  EXPECT_NE(r.err.find("ERROR[fit]"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "fit.json"));
  EXPECT_FALSE(report(dir / "fit.json")["result"]["fit"]["converged"].get<bool>());
}

TEST(Cli, ExtrapolateAndDeadtime) {
  const auto dir = spinfid::testing::scratch_dir("cli_epr");
  spinfid::analysis::RelaxationSeries s;
  for (double t = 5.0; t <= 30.0; t += 1.0) {
    s.temperatures.push_back(t);
    s.times.push_back(0.2 * std::pow(t, -3.0));
  }
  spinfid::io::save_relaxation(s, dir / "t1.csv");
  ASSERT_EQ(run({"extrapolate", (dir / "t1.csv").string(), "--out", dir.string()}).code, kExitOk);
  const Json r = report(dir / "extrapolate.json");
  const double got = r["result"]["prediction_s"]["value"].get<double>();
  EXPECT_NEAR(got / (0.2 * std::pow(294.0, -3.0)), 1.0, 1e-9);

  spinfid::io::save_trace(spinfid::testing::sample([](double t) { return 1.0 - 2.0 * std::exp(-t / 8.6e-12); },
                                                   0.0, 70e-12, 0.01e-12),
                          dir / "fast.csv");
  const auto fast = run({"epr-fit", (dir / "fast.csv").string(), "--deadtime", "120", "--out", dir.string()});
  EXPECT_EQ(fast.code, kExitError);
  EXPECT_NE(fast.err.find("ERROR[validation]"), std::string::npos);
  EXPECT_TRUE(report(dir / "epr-fit.json")["result"]["deadtime"]["empty"].get<bool>());
}

TEST(Cli, DemodRoundTrip) {
  const auto dir = spinfid::testing::scratch_dir("cli_demod");
  spinfid::io::write_atomic(dir / "cfg.json", R"({"experiment": {"time_grid": {"start_ps": 0, "stop_ps": 5, "step_ps": 0.5}, "ensemble_size": 200}, "modulation": {"pulses_per_point": 20}})");
  ASSERT_EQ(run({"simulate", "--raw-shots", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code,
            kExitOk);
  const auto d = run({"demod", (dir / "simulate.shots.csv").string(), "--out", dir.string()});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  EXPECT_TRUE(fs::exists(dir / "demod.csv"));
}

}  // namespace
