#include "hkt/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "hkt/bem.hpp"

namespace hkt::pipelines {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

dyn::FlowProfile trimmed(const dyn::FlowProfile& profile, double horizon) {
  dyn::FlowProfile p = profile;
  p.duration = std::min(profile.duration, horizon);
  return p;
}

nlp::NlpSolution::Status worst(nlp::NlpSolution::Status a, nlp::NlpSolution::Status b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

// Steady Cp over scaled (chords, twists) at the design tip-speed ratio.
// lambda_design stays a parameter of the run, not a variable: the steady
// formulation optimizes chord and twist only, and the reported lambda* is
// the argmax of the resulting geometry's Cp curve.
struct SteadyCpObjective {
  std::shared_ptr<const rotor::RotorSpec> spec;
  std::shared_ptr<const bem::RotorEvaluator> evaluator;
  int nf = 0;
  double lambda_design = 8.0;

  static constexpr double kVRef = 1.4;
  static constexpr double kTwistScale = 30.0;

  template <class T>
  T operator()(std::span<const T> x, std::span<T>) const {
    std::vector<T> chords(x.begin(), x.begin() + nf);
    std::vector<T> twists(nf);
    for (int i = 0; i < nf; ++i) twists[i] = x[nf + i] * kTwistScale;
    const T omega = T(lambda_design * kVRef / spec->geometry.tip_radius);
    const auto loads = evaluator->evaluate(std::span<const T>(chords),
                                           std::span<const T>(twists), T(kVRef), omega);
    return loads.cp;
  }
};

}  // namespace

DesignVector DesignVector::from_geometry(const rotor::BladeGeometry& geometry,
                                         double lambda_design) {
  DesignVector d;
  d.lambda_design = lambda_design;
  for (const auto& s : geometry.sections) {
    if (!s.is_design_free) continue;
    d.chords.push_back(s.chord);
    d.twists.push_back(s.twist_deg);
  }
  return d;
}

rotor::BladeGeometry DesignVector::apply_to(const rotor::BladeGeometry& base) const {
  rotor::BladeGeometry geo = base;
  const auto free = geo.free_section_indices();
  if (free.size() != chords.size() || free.size() != twists.size())
    throw ConfigError("DesignVector: size does not match the free-section count");
  for (size_t i = 0; i < free.size(); ++i) {
    geo.sections[free[i]].chord = chords[i];
    geo.sections[free[i]].twist_deg = twists[i];
  }
  return geo;
}

SteadyDesignResult optimize_steady_design(const rotor::RotorSpec& base,
                                          const DesignVector& init,
                                          const nlp::SolveOptions& solver) {
  auto spec = std::make_shared<rotor::RotorSpec>(base);
  auto evaluator = std::make_shared<bem::RotorEvaluator>(*spec);
  const int nf = evaluator->n_free();
  if (static_cast<int>(init.chords.size()) != nf)
    throw ConfigError("optimize_steady_design: init size mismatch");

  if (!(init.lambda_design > 0.0))
    throw ConfigError("optimize_steady_design: lambda_design must be positive");

  const int dim = 2 * nf;
  std::vector<double> lb(dim), ub(dim), x0(dim);
  for (int i = 0; i < nf; ++i) {
    lb[i] = 1e-3;
    ub[i] = 1.0;
    x0[i] = init.chords[i];
    lb[nf + i] = 0.0;
    ub[nf + i] = 1.0;  // twist scaled by 30 deg
    x0[nf + i] = init.twists[i] / SteadyCpObjective::kTwistScale;
  }

  SteadyCpObjective objective{spec, evaluator, nf, init.lambda_design};
  auto problem = nlp::make_ad_problem(dim, 0, lb, ub, objective, "steady-design");
  auto sol = nlp::solve(problem, x0, solver);

  SteadyDesignResult out;
  out.design.chords.assign(sol.x.begin(), sol.x.begin() + nf);
  out.design.twists.resize(nf);
  for (int i = 0; i < nf; ++i)
    out.design.twists[i] = sol.x[nf + i] * SteadyCpObjective::kTwistScale;
  out.design.lambda_design = init.lambda_design;
  out.solution = std::move(sol);

  const auto designed = rotor::with_geometry(base, out.design.apply_to(base.geometry));
  const auto opt = bem::max_cp(designed, out.design.lambda_design);
  out.cp_star = opt.cp_star;
  out.lambda_star = opt.lambda_star;
  return out;
}

ControlResult optimize_control(const rotor::RotorSpec& spec, const dyn::FlowProfile& profile,
                               const colloc::OcpConfig& cfg, double lambda_seed,
                               const nlp::SolveOptions& solver) {
  auto nlp_t = colloc::transcribe(spec, profile, cfg, /*include_geometry=*/false);
  const double seed =
      lambda_seed > 0.0 ? lambda_seed : bem::max_cp(spec, 8.0).lambda_star;
  const auto x0 = colloc::mppt_initial_guess(nlp_t, spec, profile, seed);
  ControlResult out;
  out.solution = nlp::solve(nlp_t.problem, x0, solver);
  out.trajectory = colloc::extract_trajectory(nlp_t, out.solution.x, profile, spec);
  return out;
}

double saturation_fraction(const dyn::Trajectory& traj, double u_max) {
  if (!std::isfinite(u_max) || traj.times.size() < 2) return 0.0;
  const double threshold = u_max * (1.0 - 1e-4);
  double saturated = 0.0, total = 0.0;
  for (size_t i = 1; i < traj.times.size(); ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    total += dt;
    const double ind =
        0.5 * ((traj.u[i - 1] >= threshold ? 1.0 : 0.0) + (traj.u[i] >= threshold ? 1.0 : 0.0));
    saturated += ind * dt;
  }
  return total > 0.0 ? saturated / total : 0.0;
}

namespace {

void finish_result(MethodResult& result, const rotor::RotorSpec& spec_out,
                   const dyn::FlowProfile& profile, const colloc::OcpConfig& cfg,
                   const PipelineOptions& options) {
  result.energy_kj = dyn::energy_kj(result.trajectory);
  result.saturation_fraction = saturation_fraction(result.trajectory, cfg.u_max);
  const auto opt = bem::max_cp(spec_out, 8.0);
  result.cp_star = opt.cp_star;
  result.lambda_star = opt.lambda_star;
  if (cfg.u_max == 0.0)
    result.notes.push_back(
        "degenerate scenario: u_max = 0 extracts no generator work; the rotor freewheels");
  for (const auto& n : result.trajectory.notes) result.notes.push_back(n);

  if (options.resimulate && result.trajectory.times.size() >= 3) {
    const double h = result.trajectory.times[2] - result.trajectory.times[0];
    // the rotor speed mode is fast (I / |dQ/domega| is well under a second),
    // so the re-simulation step is capped independently of the mesh
    const double dt = std::min(h / 20.0, 0.05);
    const auto control = colloc::control_interpolant(result.trajectory);
    const auto resim = dyn::simulate(spec_out, trimmed(profile, cfg.horizon), control,
                                     std::max(result.trajectory.omega.front(), 0.0), dt);
    result.resim_energy_kj = resim.final_energy_kj();
  }
}

}  // namespace

MethodResult run_baseline(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                          const colloc::OcpConfig& cfg, const PipelineOptions& options) {
  const auto t0 = Clock::now();
  MethodResult result;
  result.method = "baseline";
  result.profile = profile;
  result.cfg = cfg;
  result.geometry = baseline.geometry;

  auto control = optimize_control(baseline, profile, cfg, options.lambda_seed, options.solver);
  result.trajectory = std::move(control.trajectory);
  result.status = control.solution.status;
  result.feasibility = control.solution.feasibility;
  result.optimality = control.solution.optimality;
  result.iterations = control.solution.iterations;
  finish_result(result, baseline, profile, cfg, options);
  result.wall_time_s = seconds_since(t0);
  return result;
}

MethodResult run_sequential(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                            const colloc::OcpConfig& cfg, const DesignVector& init,
                            const PipelineOptions& options) {
  const auto t0 = Clock::now();
  MethodResult result;
  result.method = "sequential";
  result.profile = profile;
  result.cfg = cfg;

  auto steady = optimize_steady_design(baseline, init, options.solver);
  result.geometry = steady.design.apply_to(baseline.geometry);
  const auto designed = rotor::with_geometry(baseline, result.geometry);

  // Q and lambda pass from the physical design to the control stage
  auto control =
      optimize_control(designed, profile, cfg, steady.lambda_star, options.solver);
  result.trajectory = std::move(control.trajectory);
  result.status = worst(steady.solution.status, control.solution.status);
  result.feasibility = control.solution.feasibility;
  result.optimality = std::max(steady.solution.optimality, control.solution.optimality);
  result.iterations = steady.solution.iterations + control.solution.iterations;
  finish_result(result, designed, profile, cfg, options);
  result.wall_time_s = seconds_since(t0);
  return result;
}

MethodResult run_ccd(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                     const colloc::OcpConfig& cfg, const DesignVector& init,
                     const PipelineOptions& options) {
  const auto t0 = Clock::now();
  MethodResult result;
  result.method = "ccd";
  result.profile = profile;
  result.cfg = cfg;

  const auto init_spec = rotor::with_geometry(baseline, init.apply_to(baseline.geometry));
  auto nlp_t = colloc::transcribe(init_spec, profile, cfg, /*include_geometry=*/true);
  const auto x0 = colloc::mppt_initial_guess(nlp_t, init_spec, profile, options.lambda_seed);
  auto sol = nlp::solve(nlp_t.problem, x0, options.solver);

  result.geometry = colloc::geometry_from_solution(nlp_t, sol.x, init_spec);
  result.trajectory = colloc::extract_trajectory(nlp_t, sol.x, profile, init_spec);
  result.status = sol.status;
  result.feasibility = sol.feasibility;
  result.optimality = sol.optimality;
  result.iterations = sol.iterations;

  const auto spec_out = rotor::with_geometry(baseline, result.geometry);
  finish_result(result, spec_out, profile, cfg, options);
  result.wall_time_s = seconds_since(t0);
  return result;
}

bool profiles_equal(const dyn::FlowProfile& a, const dyn::FlowProfile& b) {
  if (a.kind != b.kind || a.duration != b.duration) return false;
  switch (a.kind) {
    case dyn::FlowProfile::Kind::sinusoidal:
      return a.mean == b.mean && a.amplitude == b.amplitude &&
             a.angular_rate == b.angular_rate;
    case dyn::FlowProfile::Kind::ramp:
      return a.offset == b.offset && a.gain == b.gain && a.rate == b.rate &&
             a.exponent == b.exponent;
    case dyn::FlowProfile::Kind::table:
      return a.samples == b.samples;
  }
  return false;
}

bool configs_equal(const colloc::OcpConfig& a, const colloc::OcpConfig& b) {
  const bool umax_equal = (a.u_max == b.u_max) || (!std::isfinite(a.u_max) && !std::isfinite(b.u_max));
  return a.horizon == b.horizon && a.num_segments == b.num_segments && umax_equal &&
         a.omega_lb == b.omega_lb && a.omega0_mode == b.omega0_mode &&
         (a.omega0_mode == colloc::OcpConfig::Omega0Mode::free_start ||
          a.omega0_value == b.omega0_value);
}

ComparisonReport compare(std::vector<MethodResult> entries) {
  if (entries.size() < 2)
    throw ConfigError("compare: need at least two method entries");
  for (size_t i = 1; i < entries.size(); ++i) {
    if (!profiles_equal(entries[0].profile, entries[i].profile))
      throw ConfigError("compare: entries do not share a flow profile");
    if (!configs_equal(entries[0].cfg, entries[i].cfg))
      throw ConfigError("compare: entries do not share an OCP configuration");
  }
  // baseline entry first, then sequential, then ccd
  auto rank = [](const MethodResult& m) {
    if (m.method == "baseline") return 0;
    if (m.method == "sequential") return 1;
    if (m.method == "ccd") return 2;
    return 3;
  };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  const double e0 = entries.front().energy_kj;
  if (e0 == 0.0) throw ConfigError("compare: baseline energy is zero");
  for (auto& e : entries) e.improvement_pct = 100.0 * (e.energy_kj - e0) / e0;

  ComparisonReport report;
  report.profile = entries.front().profile;
  report.cfg = entries.front().cfg;
  report.entries = std::move(entries);
  return report;
}

}  // namespace hkt::pipelines
