#include "spinfid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "parallel.hpp"
#include "spinfid/error.hpp"
#include "spinfid/glycerol.hpp"
#include "spinfid/random.hpp"

namespace spinfid::dynamics {
namespace {

constexpr std::size_t kMembersPerBlock = 512;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool positive(double x) { return x > 0.0 && !std::isnan(x); }

double member_omega(double member_g, double field, double offset, const physics::PhysicalConstants& c) {
  return member_g * c.bohr_magneton * (field + offset) / c.reduced_planck;
}

// Pumped polarization rotated about x by phi, so that p_z(t) = e cos(wt + phi).
Vec3 pumped_polarization(const ExperimentConfig& config, double phi) {
  const Vec3 p = initialize_polarization(config.pump_helicity, config.initialization_efficiency);
  return {0.0, -p[2] * std::sin(phi), p[2] * std::cos(phi)};
}

// Step sizes between consecutive non-negative grid points (the first step
// starts at the pump, t = 0), deduplicated so each member needs one sincos per
// distinct step rather than one per grid point.
struct StepTable {
  std::size_t first = 0;                // first grid index with t >= 0
  std::vector<double> distinct_dt;      // sorted unique step sizes
  std::vector<std::size_t> step_kind;   // per grid index >= first: index into distinct_dt
  std::vector<double> decay;            // per grid index >= first: exp(-dt / T2)
};

StepTable make_steps(const std::vector<double>& times, double t2) {
  StepTable table;
  table.first = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), 0.0) - times.begin());
  const std::size_t n = times.size() - table.first;
  std::vector<double> dts(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = table.first + k;
    dts[k] = times[i] - (k == 0 ? 0.0 : times[i - 1]);
  }
  table.distinct_dt = dts;
  std::sort(table.distinct_dt.begin(), table.distinct_dt.end());
  table.distinct_dt.erase(std::unique(table.distinct_dt.begin(), table.distinct_dt.end()),
                          table.distinct_dt.end());
  table.step_kind.resize(n);
  table.decay.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    table.step_kind[k] = static_cast<std::size_t>(
        std::lower_bound(table.distinct_dt.begin(), table.distinct_dt.end(), dts[k]) -
        table.distinct_dt.begin());
    table.decay[k] = std::exp(-dts[k] / t2);
  }
  return table;
}

// Adds p_z of one member at every non-negative grid point to `acc`. Same
// arithmetic as repeated evolve_bloch calls, with the rotations cached.
void accumulate_member(const StepTable& steps, double omega, Vec3 p0, std::vector<double>& acc,
                       std::vector<double>& cos_cache, std::vector<double>& sin_cache) {
  const std::size_t kinds = steps.distinct_dt.size();
  cos_cache.resize(kinds);
  sin_cache.resize(kinds);
  for (std::size_t j = 0; j < kinds; ++j) {
    cos_cache[j] = std::cos(omega * steps.distinct_dt[j]);
    sin_cache[j] = std::sin(omega * steps.distinct_dt[j]);
  }
  double y = p0[1];
  double z = p0[2];
  for (std::size_t k = 0; k < steps.step_kind.size(); ++k) {
    const double c = cos_cache[steps.step_kind[k]];
    const double s = sin_cache[steps.step_kind[k]];
    const double e2 = steps.decay[k];
    const double y_next = e2 * (y * c - z * s);
    const double z_next = e2 * (z * c + y * s);
    y = y_next;
    z = z_next;
    acc[k] += z;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DecoherenceModel, OkeArtifact, NoiseModel

DecoherenceModel DecoherenceModel::from_anchors(double eta1, double t2_1, double eta2, double t2_2, double t1) {
  require(eta1 != eta2, "decoherence anchors need two distinct viscosities");
  DecoherenceModel m;
  m.t2_slope = (t2_2 - t2_1) / (eta2 - eta1);
  m.t2_intercept = t2_1 - m.t2_slope * eta1;
  m.t1 = t1;
  m.validate();
  return m;
}

DecoherenceModel DecoherenceModel::aqueous_default() {
  return from_anchors(1.0, 8.60e-12, analysis::glycerol_viscosity(0.40, 293.15), 21.9e-12);
}

double DecoherenceModel::member_t2(double viscosity) const {
  require(positive(viscosity) && std::isfinite(viscosity), "viscosity must be finite and > 0");
  const double t2 = t2_intercept + t2_slope * viscosity;
  require(positive(t2), "decoherence model gives T2 <= 0 at viscosity " + std::to_string(viscosity) + " mPa s");
  require(t2 <= 2.0 * t1, "T2 exceeds the 2*T1 ceiling");
  return t2;
}

void DecoherenceModel::validate() const {
  require(std::isfinite(t2_intercept) && std::isfinite(t2_slope), "decoherence line must be finite");
  require(positive(t1), "T1 must be > 0");
}

double OkeArtifact::profile(double t) const {
  const double u = t / width;
  return amplitude * std::exp(-0.5 * u * u);
}

void OkeArtifact::validate() const {
  require(std::isfinite(amplitude) && amplitude >= 0.0, "OKE amplitude must be >= 0");
  require(positive(width) && std::isfinite(width), "OKE width must be > 0");
  require(odd_fraction >= 0.0 && odd_fraction <= 1.0, "OKE odd fraction must lie in [0, 1]");
}

void NoiseModel::validate() const {
  require(std::isfinite(additive_sigma) && additive_sigma >= 0.0, "additive noise sigma must be >= 0");
  require(std::isfinite(signal_per_molar), "signal_per_molar must be finite");
}

void ExperimentConfig::validate() const {
  const auto& axis = field.axis();
  require(axis[0] == 1.0 && axis[1] == 0.0 && axis[2] == 0.0, "the applied field must point along x");
  decoherence.validate();
  decoherence.member_t2(viscosity);
  require(positive(temperature), "temperature must be > 0");
  require(positive(concentration) && std::isfinite(concentration), "concentration must be > 0");
  require(positive(pump_energy) && std::isfinite(pump_energy), "pump energy must be > 0");
  require(initialization_efficiency >= 0.0 && initialization_efficiency <= 1.0,
          "initialization efficiency must lie in [0, 1]");
  require(positive(excited_state_lifetime), "excited-state lifetime must be > 0");
  require(std::isfinite(phase_phi0) && std::isfinite(phase_cubic), "phase parameters must be finite");
  oke.validate();
  noise.validate();
  if (time_grid.empty()) throw ValidationError("time grid is empty");
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (!std::isfinite(time_grid[i])) throw ValidationError("time grid contains a non-finite value");
    if (i > 0 && !(time_grid[i] > time_grid[i - 1])) {
      throw ValidationError("time grid must be strictly increasing");
    }
  }
  if (ensemble_size < 1) throw ValidationError("ensemble size must be >= 1");
}

// ---------------------------------------------------------------------------
// Operations

Vec3 initialize_polarization(Helicity helicity, double efficiency) {
  require(efficiency >= 0.0 && efficiency <= 1.0, "initialization efficiency must lie in [0, 1]");
  const double sign = helicity == Helicity::left ? 1.0 : -1.0;
  return {0.0, 0.0, sign * efficiency};
}

BlochState evolve_bloch(const BlochState& state, double field_along_x, double t2, double t1, double dt,
                        const physics::PhysicalConstants& c) {
  require(dt >= 0.0 && std::isfinite(dt), "evolve_bloch: dt must be finite and >= 0");
  require(positive(t2) && positive(t1), "evolve_bloch: T1 and T2 must be > 0");
  require(t2 <= 2.0 * t1, "evolve_bloch: T2 must not exceed 2*T1");
  require(std::isfinite(field_along_x), "evolve_bloch: field must be finite");

  const double omega = member_omega(state.member_g, field_along_x, state.member_field_offset, c);
  const double cs = std::cos(omega * dt);
  const double sn = std::sin(omega * dt);
  const double e2 = std::exp(-dt / t2);
  const double e1 = std::exp(-dt / t1);
  const auto& [x, y, z] = state.polarization;

  BlochState next = state;
  next.polarization = {e1 * x, e2 * (y * cs - z * sn), e2 * (z * cs + y * sn)};
  return next;
}

double effective_t2star(const DecoherenceModel& model, double viscosity, double field, const physics::GValue& g,
                        const physics::PhysicalConstants& c) {
  require(field >= 0.0 && std::isfinite(field), "effective_t2star: field must be >= 0");
  const double t2 = model.member_t2(viscosity);
  const double broadening = g.spread_sigma() * c.bohr_magneton * field / (std::numbers::sqrt2 * c.reduced_planck);
  return 1.0 / (1.0 / t2 + broadening);
}

double excited_state_weight(double t, double lifetime, ExcitedStateCoupling mode) {
  require(t >= 0.0, "excited_state_weight: t must be >= 0");
  require(positive(lifetime), "excited_state_weight: lifetime must be > 0");
  if (mode == ExcitedStateCoupling::none) return 1.0;
  return std::exp(-t / lifetime);
}

double phase_offset(double field, double phi0, double cubic_coeff) {
  return phi0 + cubic_coeff * field * field * field;
}

double signal_amplitude(const ExperimentConfig& config) {
  const double sign = config.pump_helicity == Helicity::left ? 1.0 : -1.0;
  return config.noise.signal_per_molar * config.concentration * (config.pump_energy / kReferencePumpEnergy) *
         config.initialization_efficiency * sign;
}

ClosedFormParameters closed_form_parameters(const ExperimentConfig& config) {
  const double b = config.field.magnitude();
  return {signal_amplitude(config), config.decoherence.member_t2(config.viscosity),
          member_omega(config.g.iso(), b, 0.0, physics::codata2018),
          phase_offset(b, config.phase_phi0, config.phase_cubic)};
}

TraceComponents simulate_components(const ExperimentConfig& config, const SimulationOptions& options) {
  config.validate();
  const auto& c = physics::codata2018;
  const double field = config.field.magnitude();
  const double t2 = config.decoherence.member_t2(config.viscosity);
  const double phi = phase_offset(field, config.phase_phi0, config.phase_cubic);
  const Vec3 p0 = pumped_polarization(config, phi);
  const StepTable steps = make_steps(config.time_grid, t2);
  const std::size_t n_active = steps.step_kind.size();

  // Ensemble mean of p_z at every non-negative delay.
  std::vector<double> mean_pz(n_active, 0.0);
  if (config.g.spread_sigma() == 0.0 || field == 0.0) {
    // Identical members (no spread, or no precession to spread): the ensemble
    // mean is the single-member trajectory.
    std::vector<double> cs, sn;
    accumulate_member(steps, member_omega(config.g.iso(), field, 0.0, c), p0, mean_pz, cs, sn);
  } else {
    const std::size_t members = config.ensemble_size;
    const std::size_t blocks = (members + kMembersPerBlock - 1) / kMembersPerBlock;
    std::vector<std::vector<double>> partial(blocks);
    detail::parallel_for(blocks, options.threads, [&](std::size_t b) {
      std::vector<double> acc(n_active, 0.0);
      std::vector<double> cs, sn;
      const std::size_t end = std::min(members, (b + 1) * kMembersPerBlock);
      for (std::size_t m = b * kMembersPerBlock; m < end; ++m) {
        auto rng = substream(config.rng_seed, kStreamEnsemble, m);
        std::normal_distribution<double> g_dist(config.g.iso(), config.g.spread_sigma());
        const double member_g = g_dist(rng);
        accumulate_member(steps, member_omega(member_g, field, 0.0, c), p0, acc, cs, sn);
      }
      partial[b] = std::move(acc);
    });
    for (const auto& acc : partial) {
      for (std::size_t k = 0; k < n_active; ++k) mean_pz[k] += acc[k];
    }
    const double inv = 1.0 / static_cast<double>(members);
    for (double& v : mean_pz) v *= inv;
  }

  const std::size_t n = config.time_grid.size();
  TraceComponents out;
  out.times = config.time_grid;
  out.spin.assign(n, 0.0);
  out.oke_even.assign(n, 0.0);
  out.oke_residual.assign(n, 0.0);
  out.noise.assign(n, 0.0);

  const double amplitude =
      config.noise.signal_per_molar * config.concentration * (config.pump_energy / kReferencePumpEnergy);
  for (std::size_t k = 0; k < n_active; ++k) {
    const std::size_t i = steps.first + k;
    out.spin[i] = amplitude * mean_pz[k] *
                  excited_state_weight(out.times[i], config.excited_state_lifetime, config.excited_state_coupling);
  }
  if (options.include_oke) {
    for (std::size_t i = 0; i < n; ++i) {
      out.oke_even[i] = config.oke.even_part(out.times[i]);
      out.oke_residual[i] = config.oke.residual_part(out.times[i]);
    }
  }
  if (options.include_noise && config.noise.additive_sigma > 0.0) {
    auto rng = substream(config.noise.rng_seed, kStreamTraceNoise, 0);
    std::normal_distribution<double> noise(0.0, config.noise.additive_sigma);
    for (double& v : out.noise) v = noise(rng);
  }
  return out;
}

TraceSeries simulate_trace(const ExperimentConfig& config, const SimulationOptions& options) {
  TraceComponents parts = simulate_components(config, options);
  std::vector<double> values(parts.times.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = parts.spin[i] + parts.oke_residual[i] + parts.noise[i];
  }
  return TraceSeries(std::move(parts.times), std::move(values),
                     "simulate: B=" + std::to_string(config.field.magnitude()) + " T, eta=" +
                         std::to_string(config.viscosity) + " mPa s");
}

}  // namespace spinfid::dynamics
