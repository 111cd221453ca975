#include "spinfid/cli/app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>

#include "spinfid/analysis.hpp"
#include "spinfid/cli/config.hpp"
#include "spinfid/cli/report.hpp"
#include "spinfid/dynamics.hpp"
#include "spinfid/error.hpp"
#include "spinfid/fit.hpp"
#include "spinfid/io.hpp"
#include "spinfid/signal_chain.hpp"

#ifndef SPINFID_VERSION
#define SPINFID_VERSION "0.0.0"
#endif

namespace spinfid::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kMaxPlotPoints = 2000;
constexpr double kPs = 1e-12;

struct Options {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string stem;
  bool svg = true;
  std::optional<double> fit_start_ps;
  std::optional<double> field_t;
  std::optional<double> viscosity;
  std::optional<double> glycerol_fraction;
  unsigned threads = 0;
  std::string input;
  std::optional<std::string> model;
  bool raw_shots = false;
  bool stretch_free = false;
  std::optional<double> fit_lo, fit_hi, target;
  std::optional<std::string> mode;
  std::optional<double> threshold;
  std::optional<double> deadtime_ns;
};

// Everything a command produces before it is written out.
struct Outcome {
  Json result;
  bool converged = true;
  std::string failure;  // message when !converged
  bool invalid = false;  // the failure is a data problem, not a fit problem
};

class Runner {
 public:
  Runner(Options opt, std::ostream& out) : opt_(std::move(opt)), out_(out) {}

  int run() {
    cfg_ = opt_.config_path.empty() ? RunConfig{} : load_config(opt_.config_path);
    if (!opt_.config_path.empty()) add_input(opt_.config_path);
    apply_overrides();
    cfg_.validate();
    fs::create_directories(out_dir());

    Outcome outcome;
    const auto& c = opt_.command;
    if (c == "simulate") outcome = simulate();
    else if (c == "fit") outcome = fit_trace();
    else if (c == "sweep-field") outcome = sweep_field();
    else if (c == "sweep-viscosity") outcome = sweep_viscosity();
    else if (c == "epr-fit") outcome = epr_fit();
    else if (c == "extrapolate") outcome = extrapolate();
    else if (c == "sensitivity") outcome = sensitivity();
    else if (c == "demod") outcome = demod();
    else throw ValidationError("unknown command '" + c + "'");

    Json report;
    report["tool"] = "spinfid";
    report["version"] = SPINFID_VERSION;
    report["command"] = c;
    report["config"] = config_to_json(cfg_);
    report["inputs"] = inputs_;
    report["outputs"] = outputs_;
    report["result"] = outcome.result;
    const fs::path path = out_dir() / (stem() + ".json");
    io::write_atomic(path, dump_report(report));
    out_ << "wrote " << path.string() << "\n";
    if (!outcome.converged && outcome.invalid) {
      throw ValidationError(outcome.failure + "; report written to " + path.string());
    }
    if (!outcome.converged) throw NotConverged(outcome.failure + "; report written to " + path.string());
    return kExitOk;
  }

  struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  fs::path out_dir() const { return fs::path(opt_.out_dir); }
  std::string stem() const { return opt_.stem.empty() ? opt_.command : opt_.stem; }

  void apply_overrides() {
    if (opt_.seed) cfg_.seed = *opt_.seed;
    if (opt_.fit_start_ps) cfg_.fit.fit_start_ps = *opt_.fit_start_ps;
    if (opt_.field_t) {
      cfg_.experiment.field_t = *opt_.field_t;
      cfg_.fit.field_t = *opt_.field_t;
    }
    if (opt_.viscosity) {
      cfg_.experiment.viscosity_mpas = *opt_.viscosity;
      cfg_.experiment.glycerol_mass_fraction.reset();
    }
    if (opt_.glycerol_fraction) cfg_.experiment.glycerol_mass_fraction = *opt_.glycerol_fraction;
    if (opt_.model) cfg_.fit.model = *opt_.model;
    if (opt_.stretch_free) cfg_.fit.stretch_free = true;
    if (opt_.fit_lo) cfg_.extrapolation.fit_lo_k = *opt_.fit_lo;
    if (opt_.fit_hi) cfg_.extrapolation.fit_hi_k = *opt_.fit_hi;
    if (opt_.target) cfg_.extrapolation.target_k = *opt_.target;
    if (opt_.mode) cfg_.extrapolation.mode = *opt_.mode;
    if (opt_.threshold) cfg_.sensitivity.threshold_snr = *opt_.threshold;
    if (opt_.deadtime_ns) {
      cfg_.deadtime.enabled = true;
      cfg_.deadtime.deadtime_ns = *opt_.deadtime_ns;
    }
  }

  std::string add_input(const std::string& path) {
    const std::string data = io::read_file(path);
    inputs_.push_back(Json{{"path", path}, {"sha256", sha256_hex(data)}});
    return data;
  }

  void record_output(const fs::path& path, const std::string& panel_or_kind) {
    outputs_.push_back(Json{{"kind", panel_or_kind}, {"file", path.filename().string()},
                            {"sha256", sha256_hex(io::read_file(path))}});
  }

  void write_trace(const TraceSeries& trace, const std::string& suffix) {
    const fs::path path = out_dir() / (stem() + suffix);
    io::save_trace(trace, path);
    record_output(path, "trace");
  }

  void plot(const std::string& panel, io::PlotPanel p) {
    if (!opt_.svg) return;
    const fs::path path = out_dir() / (stem() + "." + panel + ".svg");
    io::emit_plot(p, path);
    record_output(path, "svg");
  }

  dynamics::SimulationOptions sim_options() const {
    dynamics::SimulationOptions s;
    s.threads = opt_.threads;
    return s;
  }

  fit::ExtractOptions extract_options() const {
    fit::ExtractOptions e;
    e.fit_start = cfg_.fit.fit_start_ps * kPs;
    if (cfg_.fit.fit_end_ps) e.fit_end = *cfg_.fit.fit_end_ps * kPs;
    e.fit.max_iterations = cfg_.fit.max_iterations;
    return e;
  }

  // ---------------------------------------------------------------------
  // Commands

  Outcome simulate() {
    const auto exp = cfg_.experiment_config();
    TraceSeries trace = dynamics::simulate_trace(exp, sim_options());
    trace.set_provenance("spinfid simulate seed=" + std::to_string(cfg_.seed));
    write_trace(trace, ".csv");
    Outcome o;
    if (opt_.raw_shots) {
      const auto records = signal::synthesize_shot_records(exp, cfg_.modulation_config(), sim_options());
      const fs::path path = out_dir() / (stem() + ".shots.csv");
      io::save_shots(records, path);
      record_output(path, "shots");
    }
    const auto cf = dynamics::closed_form_parameters(exp);
    const double t2star = dynamics::effective_t2star(exp.decoherence, exp.viscosity, exp.field.magnitude(), exp.g);
    o.result["n_samples"] = trace.size();
    o.result["viscosity_mpas"] = exp.viscosity;
    o.result["expected"] = Json{{"eta0", cf.eta0},
                                {"t2_member_s", cf.t2},
                                {"t2star_rate_model_s", t2star},
                                {"omega_rad_per_s", cf.omega},
                                {"phi_rad", cf.phi}};
    plot("trace", trace_panel("simulated trace", trace, nullptr));
    return o;
  }

  Outcome fit_trace() {
    const std::string data = add_input(opt_.input);
    const TraceSeries trace = io::parse_trace(data, opt_.input);
    const fit::FitResult r = run_fit(trace);
    Outcome o;
    o.result["fit"] = fit_to_json(r);
    o.result["summary"] = summary(r);
    plot("fit", trace_panel("fit: " + std::string(fit::to_string(r.model)), trace, &r));
    if (!r.converged) {
      o.converged = false;
      o.failure = "fit did not converge after " + std::to_string(r.n_iterations) + " iterations";
    }
    return o;
  }

  fit::FitResult run_fit(const TraceSeries& trace) const {
    const auto id = fit::model_from_string(cfg_.fit.model);
    const auto ex = extract_options();
    if (id == fit::ModelId::damped_cosine) return fit::extract_t2star(trace, cfg_.fit.field_t, ex);
    const fit::Window window{ex.fit_start, ex.fit_end.value_or(INFINITY)};
    fit::ModelSpec spec(id);
    if (id == fit::ModelId::hahn_echo && cfg_.fit.stretch_free) spec.fix("stretch", false);
    const auto guess = fit::initial_guess(id, trace, window);
    return fit::nonlinear_least_squares(spec, trace, guess.parameters, window, ex.fit);
  }

  Json summary(const fit::FitResult& r) const {
    Json s;
    auto ps = [](double v) { return number_or_null(v / kPs); };
    switch (r.model) {
      case fit::ModelId::damped_cosine:
        s["t2star_ps"] = ps(r.value("t2star"));
        s["t2star_sigma_ps"] = ps(r.sigma_of("t2star"));
        s["omega_rad_per_s"] = number_or_null(r.value("omega"));
        s["frequency_ghz"] = number_or_null(r.value("omega") / (2.0 * std::numbers::pi) / 1e9);
        break;
      case fit::ModelId::exponential:
        s["tau_ps"] = ps(r.value("tau"));
        s["tau_sigma_ps"] = ps(r.sigma_of("tau"));
        break;
      case fit::ModelId::inversion_recovery:
        s["t1_s"] = number_or_null(r.value("t1"));
        s["t1_sigma_s"] = number_or_null(r.sigma_of("t1"));
        break;
      case fit::ModelId::hahn_echo:
        s["tm_s"] = number_or_null(r.value("tm"));
        s["tm_sigma_s"] = number_or_null(r.sigma_of("tm"));
        break;
    }
    return s;
  }

  Outcome sweep_field() {
    analysis::SweepOptions so{extract_options(), sim_options()};
    const auto r = analysis::run_field_sweep(cfg_.experiment_config(), cfg_.sweep.fields_t, so);
    Outcome o = sweep_points(r, "field_t");
    o.result["g"] = estimate_to_json(*r.g);

    io::PlotPanel omega{"Larmor frequency vs field", "field (T)", "omega (rad/ps)", {}};
    io::PlotSeries pts{"fitted omega", {}, {}, io::SeriesStyle::points};
    io::PlotSeries line{"g = " + fixed3(r.g->value), {0.0}, {0.0}, io::SeriesStyle::line};
    const double slope = r.g->value * physics::codata2018.bohr_magneton / physics::codata2018.reduced_planck;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      pts.x.push_back(r.values[i]);
      pts.y.push_back(r.fits[i].value("omega") * kPs);
    }
    line.x.push_back(r.values.back());
    line.y.push_back(slope * r.values.back() * kPs);
    omega.series = {pts, line};
    plot("traces", sweep_panel("traces by field", r, "B = ", " T"));
    plot("omega", omega);
    return o;
  }

  Outcome sweep_viscosity() {
    analysis::SweepOptions so{extract_options(), sim_options()};
    const auto visc = cfg_.sweep_viscosities();
    const auto r = analysis::run_viscosity_sweep(cfg_.experiment_config(), visc, so);
    Outcome o = sweep_points(r, "viscosity_mpas");
    if (r.line) {
      o.result["line"] = line_to_json(*r.line);
      o.result["slope_ps_per_mpas"] = number_or_null(r.line->slope / kPs);
      o.result["intercept_ps"] = number_or_null(r.line->intercept / kPs);
    } else {
      o.result["line"] = nullptr;
    }
    io::PlotPanel t2{"T2* vs viscosity", "viscosity (mPa s)", "T2* (ps)", {}};
    io::PlotSeries pts{"fitted T2*", {}, {}, io::SeriesStyle::points};
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      pts.x.push_back(r.values[i]);
      pts.y.push_back(r.fits[i].value("t2star") / kPs);
    }
    t2.series.push_back(pts);
    if (r.line) {
      io::PlotSeries line{"linear fit", {}, {}, io::SeriesStyle::line};
      for (double v : {r.values.front(), r.values.back()}) {
        line.x.push_back(v);
        line.y.push_back(r.line->predict(v) / kPs);
      }
      t2.series.push_back(line);
    }
    plot("traces", sweep_panel("traces by viscosity", r, "eta = ", " mPa s"));
    plot("t2star", t2);
    return o;
  }

  Outcome sweep_points(const analysis::SweepResult& r, const char* axis_key) {
    Outcome o;
    Json points = Json::array();
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      points.push_back(Json{{axis_key, r.values[i]}, {"fit", fit_to_json(r.fits[i])}, {"summary", summary(r.fits[i])}});
      if (!r.fits[i].converged && o.converged) {
        o.converged = false;
        o.failure = "fit at sweep point " + std::to_string(i) + " did not converge";
      }
    }
    o.result["points"] = points;
    return o;
  }

  Outcome epr_fit() {
    if (!opt_.model && cfg_.fit.model == "damped_cosine") cfg_.fit.model = "inversion_recovery";
    const auto id = fit::model_from_string(cfg_.fit.model);
    if (id != fit::ModelId::inversion_recovery && id != fit::ModelId::hahn_echo) {
      throw ValidationError("epr-fit: model must be inversion_recovery or hahn_echo");
    }
    const std::string data = add_input(opt_.input);
    TraceSeries trace = io::parse_trace(data, opt_.input);
    Outcome o;
    if (cfg_.deadtime.enabled) {
      const auto d = analysis::deadtime_truncate(trace, cfg_.deadtime.deadtime_ns * 1e-9, cfg_.deadtime.increment_ns * 1e-9);
      o.result["deadtime"] = Json{{"removed", d.removed}, {"remaining", d.trace.size()}, {"empty", d.empty}};
      if (d.empty) {
        o.result["fit"] = nullptr;
        o.converged = false;
        o.invalid = true;
        o.failure = "no samples remain after the " + io::format_double(cfg_.deadtime.deadtime_ns) + " ns deadtime";
        return o;
      }
      trace = d.trace;
    }
    const fit::FitResult r = run_fit(trace);
    o.result["fit"] = fit_to_json(r);
    o.result["summary"] = summary(r);
    plot("fit", trace_panel(std::string(fit::to_string(r.model)), trace, &r));
    if (!r.converged) {
      o.converged = false;
      o.failure = "fit did not converge after " + std::to_string(r.n_iterations) + " iterations";
    }
    return o;
  }

  Outcome extrapolate() {
    const std::string data = add_input(opt_.input);
    const auto series = io::parse_relaxation(data);
    const auto& e = cfg_.extrapolation;
    const auto mode = cfg_.extrapolation_mode();
    const auto x = analysis::extrapolate_t1(series, e.fit_lo_k, e.fit_hi_k, e.target_k, mode);
    Outcome o;
    o.result["kind"] = series.kind == analysis::RelaxationKind::t1 ? "T1" : "Tm";
    o.result["mode"] = e.mode;
    o.result["target_k"] = e.target_k;
    o.result["prediction_s"] = estimate_to_json(x.value);
    o.result["physical"] = x.physical;
    o.result["n_used"] = x.n_used;
    o.result["line"] = line_to_json(x.line);
    if (mode == analysis::ExtrapolationMode::log_log) o.result["power_law_exponent"] = number_or_null(x.line.slope);

    const bool logs = mode == analysis::ExtrapolationMode::log_log;
    io::PlotPanel p{"relaxation extrapolation (" + e.mode + ")", logs ? "log10 temperature (K)" : "temperature (K)",
                    logs || mode == analysis::ExtrapolationMode::semi_log ? "log10 time (s)" : "time (s)", {}};
    const bool log_y = mode != analysis::ExtrapolationMode::linear;
    auto fx = [&](double T) { return logs ? std::log10(T) : T; };
    auto fy = [&](double t) { return log_y ? std::log10(t) : t; };
    io::PlotSeries pts{"measured", {}, {}, io::SeriesStyle::points};
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      pts.x.push_back(fx(series.temperatures[i]));
      pts.y.push_back(fy(series.times[i]));
    }
    io::PlotSeries line{"fit and extrapolation", {}, {}, io::SeriesStyle::line};
    const double lo = std::min(e.fit_lo_k, series.temperatures.front());
    const double hi = std::max(e.target_k, e.fit_hi_k);
    for (int i = 0; i <= 100; ++i) {
      const double T = logs ? lo * std::pow(hi / lo, i / 100.0) : lo + (hi - lo) * i / 100.0;
      const double xv = logs ? std::log(T) : T;
      const double yv = x.line.predict(xv);
      line.x.push_back(fx(T));
      line.y.push_back(log_y ? yv / std::log(10.0) : yv);
    }
    p.series = {pts, line};
    plot("extrapolation", p);
    return o;
  }

  Outcome sensitivity() {
    Outcome o;
    double snr;
    if (cfg_.sensitivity.reference_snr) {
      snr = *cfg_.sensitivity.reference_snr;
      o.result["reference_snr_source"] = "config";
    } else {
      const auto exp = cfg_.experiment_config();
      const TraceSeries trace = dynamics::simulate_trace(exp, sim_options());
      const auto r = fit::extract_t2star(trace, exp.field.magnitude(), extract_options());
      snr = analysis::estimate_snr(trace, r);
      o.result["reference_snr_source"] = "simulated";
      o.result["reference_fit"] = fit_to_json(r);
      plot("reference", trace_panel("reference trace", trace, &r));
    }
    const double c_ref = cfg_.experiment.concentration_molar;
    const double pump = cfg_.sensitivity.pump_energy_uj.value_or(cfg_.experiment.pump_energy_uj);
    const double ratio = pump / cfg_.experiment.pump_energy_uj;
    const double th = cfg_.sensitivity.threshold_snr;
    o.result["reference_concentration_molar"] = c_ref;
    o.result["reference_snr"] = snr;
    o.result["threshold_snr"] = th;
    o.result["detection_limit_molar"] = analysis::detection_limit(c_ref, snr, th);
    o.result["pump_energy_uj"] = pump;
    o.result["detection_limit_at_pump_energy_molar"] = analysis::detection_limit(c_ref, snr, th, ratio);
    return o;
  }

  Outcome demod() {
    const std::string data = add_input(opt_.input);
    const auto records = io::parse_shots(data);
    TraceSeries trace = signal::demodulate_records(records);
    trace.set_provenance("spinfid demod " + opt_.input);
    write_trace(trace, ".csv");
    std::size_t pairs = 0;
    for (const auto& r : records) pairs += r.pairs.size();
    Outcome o;
    o.result["n_delays"] = records.size();
    o.result["n_pairs"] = pairs;
    plot("trace", trace_panel("demodulated trace", trace, nullptr));
    return o;
  }

  // ---------------------------------------------------------------------
  // Plot helpers

  static std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
  }

  static io::PlotSeries decimated(const std::string& label, const TraceSeries& t, io::SeriesStyle style) {
    io::PlotSeries s{label, {}, {}, style};
    const std::size_t stride = std::max<std::size_t>(1, (t.size() + kMaxPlotPoints - 1) / kMaxPlotPoints);
    for (std::size_t i = 0; i < t.size(); i += stride) {
      s.x.push_back(t.times()[i] / kPs);
      s.y.push_back(t.values()[i]);
    }
    return s;
  }

  static io::PlotPanel trace_panel(const std::string& title, const TraceSeries& trace, const fit::FitResult* r) {
    io::PlotPanel p{title, "delay (ps)", "signal (arb. units)", {}};
    p.series.push_back(decimated("data", trace, io::SeriesStyle::line));
    if (r) {
      const auto [i0, i1] = trace.window_indices(r->window.start, r->window.end);
      io::PlotSeries f{"fit", {}, {}, io::SeriesStyle::line};
      const std::size_t stride = std::max<std::size_t>(1, (i1 - i0 + kMaxPlotPoints - 1) / kMaxPlotPoints);
      for (std::size_t i = i0; i < i1; i += stride) {
        f.x.push_back(trace.times()[i] / kPs);
        f.y.push_back(r->curve(trace.times()[i]));
      }
      p.series.push_back(f);
    }
    return p;
  }

  static io::PlotPanel sweep_panel(const std::string& title, const analysis::SweepResult& r, const std::string& pre,
                                   const std::string& unit) {
    io::PlotPanel p{title, "delay (ps)", "signal (arb. units)", {}};
    for (std::size_t i = 0; i < r.traces.size(); ++i) {
      p.series.push_back(decimated(pre + io::format_double(r.values[i]) + unit, r.traces[i], io::SeriesStyle::line));
    }
    return p;
  }

  Options opt_;
  std::ostream& out_;
  RunConfig cfg_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--seed", o.seed, "random seed (default 20240517)");
  sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--stem", o.stem, "output file stem (default: command name)");
  sub->add_flag("--svg,!--no-svg", o.svg, "write SVG plots (default on)");
  sub->add_option("--fit-start", o.fit_start_ps, "fit window start in ps (default 0.5)");
  sub->add_option("--field", o.field_t, "magnetic field in T");
  sub->add_option("--viscosity", o.viscosity, "viscosity in mPa s");
  sub->add_option("--glycerol-fraction", o.glycerol_fraction, "glycerol mass fraction 0..0.6");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"spinfid: spin free-induction-decay simulation and fitting", "spinfid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPINFID_VERSION);

  auto* sim = app.add_subcommand("simulate", "simulate a trace from a config");
  add_common(sim, opt);
  sim->add_flag("--raw-shots", opt.raw_shots, "also write per-shot left/right data");

  auto* fit = app.add_subcommand("fit", "fit a trace CSV");
  add_common(fit, opt);
  fit->add_option("trace", opt.input, "trace CSV")->required();
  fit->add_option("--model", opt.model, "damped_cosine, exponential, inversion_recovery or hahn_echo");
  fit->add_flag("--stretch-free", opt.stretch_free, "fit the Hahn-echo stretch exponent");

  auto* sf = app.add_subcommand("sweep-field", "simulate and fit over sweep.fields_t, then extract g");
  add_common(sf, opt);

  auto* sv = app.add_subcommand("sweep-viscosity", "simulate and fit over viscosities, then regress T2*");
  add_common(sv, opt);

  auto* epr = app.add_subcommand("epr-fit", "fit an inversion-recovery or Hahn-echo trace");
  add_common(epr, opt);
  epr->add_option("trace", opt.input, "trace CSV")->required();
  epr->add_option("--model", opt.model, "inversion_recovery (default) or hahn_echo");
  epr->add_flag("--stretch-free", opt.stretch_free, "fit the Hahn-echo stretch exponent");
  epr->add_option("--deadtime", opt.deadtime_ns, "drop samples before this delay (ns) and snap to the increment");

  auto* ex = app.add_subcommand("extrapolate", "extrapolate a relaxation series");
  add_common(ex, opt);
  ex->add_option("series", opt.input, "relaxation CSV")->required();
  ex->add_option("--fit-lo", opt.fit_lo, "lowest temperature in the fit (K)");
  ex->add_option("--fit-hi", opt.fit_hi, "highest temperature in the fit (K)");
  ex->add_option("--target", opt.target, "temperature to predict (K)");
  ex->add_option("--mode", opt.mode, "log_log (default), semi_log or linear");

  auto* sens = app.add_subcommand("sensitivity", "concentration detection limit from a reference config");
  add_common(sens, opt);
  sens->add_option("--threshold", opt.threshold, "minimum usable SNR (default 3)");

  auto* dm = app.add_subcommand("demod", "demodulate a raw shot file into a trace");
  add_common(dm, opt);
  dm->add_option("shots", opt.input, "shots CSV")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << SPINFID_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR[validation]: " << e.what() << "\n";
    return kExitError;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    Runner runner(opt, out);
    return runner.run();
  } catch (const Runner::NotConverged& e) {
    err << "ERROR[fit]: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const Error& e) {
    err << "ERROR[" << to_string(e.category()) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const fs::filesystem_error& e) {
    err << "ERROR[io]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "ERROR[internal]: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace spinfid::cli
