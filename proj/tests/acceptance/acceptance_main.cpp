// Acceptance suite: runs every study end to end at the default mesh and
// prints one PASS/FAIL line per criterion. --quick runs the reduced-mesh
// property subset only (criteria 1 and 7).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "../bem_oracle.hpp"
#include "hkt/bem.hpp"
#include "hkt/colloc.hpp"
#include "hkt/dynamics.hpp"
#include "hkt/nlp.hpp"
#include "hkt/pipelines.hpp"
#include "hkt/rotor_model.hpp"

using namespace hkt;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kDataDir = HKT_TEST_DATA_DIR;

// seeds of the two steady-design runs ("near 8" and "near 10") and of the
// published-comparison scenarios (the better sequential design, which is
// also where the joint problem rests)
constexpr double kDesignSeedLow = 8.2;
constexpr double kDesignSeedHigh = 9.4;
constexpr double kScenarioSeed = 7.70;

struct Check {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

std::vector<Check> g_checks;

void report(const std::string& name, bool pass, const std::string& detail) {
  g_checks.push_back({name, pass, false, detail});
  std::printf("%-4s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

void report_skip(const std::string& name, const std::string& why) {
  g_checks.push_back({name, true, true, why});
  std::printf("SKIP %s: %s\n", name.c_str(), why.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct GeometryGap {
  double chord = 0.0;
  double twist = 0.0;
};

GeometryGap gap(const rotor::BladeGeometry& a, const rotor::BladeGeometry& b) {
  GeometryGap g;
  for (size_t i = 0; i < a.sections.size(); ++i) {
    if (!a.sections[i].is_design_free) continue;
    g.chord = std::max(g.chord, std::abs(a.sections[i].chord - b.sections[i].chord));
    g.twist =
        std::max(g.twist, std::abs(a.sections[i].twist_deg - b.sections[i].twist_deg));
  }
  return g;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

dyn::FlowProfile sinusoid() { return dyn::FlowProfile::sinusoidal(1.4, 0.2, 0.1, 150.0); }
dyn::FlowProfile ramp() { return dyn::FlowProfile::ramp(1.55, 0.2, 0.1, 0.7, 150.0); }

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

colloc::OcpConfig make_cfg(int segments, double u_max) {
  colloc::OcpConfig cfg;
  cfg.horizon = 150.0;
  cfg.num_segments = segments;
  cfg.u_max = u_max;
  return cfg;
}

// ---------------------------------------------------------------------------

void criterion_1(const rotor::RotorSpec& baseline) {
  const auto t0 = Clock::now();
  const auto opt = bem::max_cp(baseline, 7.0);
  const double dt = seconds_since(t0);
  const bool pass = std::abs(opt.cp_star - 0.4633) <= 0.02 &&
                    std::abs(opt.lambda_star - 7.6) <= 0.5 && dt < 10.0;
  report("criterion 1 (baseline steady performance)", pass,
         fmt("max Cp %.4f at lambda %.2f (target 0.4633+-0.02 at 7.6+-0.5), %.1f s",
             opt.cp_star, opt.lambda_star, dt));
}

void criterion_2(const rotor::RotorSpec& baseline) {
  const auto t0 = Clock::now();
  const auto d_low = pipelines::optimize_steady_design(
      baseline, pipelines::DesignVector::from_geometry(baseline.geometry, kDesignSeedLow));
  const double t_low = seconds_since(t0);
  const auto t1 = Clock::now();
  const auto d_high = pipelines::optimize_steady_design(
      baseline, pipelines::DesignVector::from_geometry(baseline.geometry, kDesignSeedHigh));
  const double t_high = seconds_since(t1);

  const auto g = gap(d_low.design.apply_to(baseline.geometry),
                     d_high.design.apply_to(baseline.geometry));
  const bool distinct =
      g.chord > 1e-2 || std::abs(d_low.lambda_star - d_high.lambda_star) > 0.2;
  const bool pass = std::abs(d_low.cp_star - 0.4744) <= 0.02 &&
                    std::abs(d_low.lambda_star - 8.5) <= 0.5 &&
                    std::abs(d_high.cp_star - 0.4745) <= 0.02 &&
                    std::abs(d_high.lambda_star - 9.1) <= 0.5 && distinct &&
                    t_low < 300.0 && t_high < 300.0;
  report("criterion 2 (two distinct steady optima)", pass,
         fmt("guess %.1f -> Cp %.4f at %.2f (%.0f s); guess %.1f -> Cp %.4f at %.2f "
             "(%.0f s); chord gap %.3f m",
             kDesignSeedLow, d_low.cp_star, d_low.lambda_star, t_low, kDesignSeedHigh,
             d_high.cp_star, d_high.lambda_star, t_high, g.chord));
}

struct ScenarioRuns {
  pipelines::MethodResult baseline, sequential, ccd;
  double total_s = 0.0;
};

ScenarioRuns run_scenario(const rotor::RotorSpec& spec, const dyn::FlowProfile& profile,
                          const colloc::OcpConfig& cfg, double lambda_seed) {
  const auto t0 = Clock::now();
  pipelines::PipelineOptions options;
  options.lambda_seed = lambda_seed;
  const auto init = pipelines::DesignVector::from_geometry(spec.geometry, lambda_seed);

  ScenarioRuns out;
  // the three method runs are independent
  std::thread tb(
      [&] { out.baseline = pipelines::run_baseline(spec, profile, cfg, options); });
  std::thread ts(
      [&] { out.sequential = pipelines::run_sequential(spec, profile, cfg, init, options); });
  out.ccd = pipelines::run_ccd(spec, profile, cfg, init, options);
  tb.join();
  ts.join();
  out.total_s = seconds_since(t0);
  return out;
}

void criterion_3(const ScenarioRuns& s1) {
  const double eb = s1.baseline.energy_kj;
  const double es = s1.sequential.energy_kj;
  const double ec = s1.ccd.energy_kj;
  const auto g = gap(s1.sequential.geometry, s1.ccd.geometry);
  const double improvement = 100.0 * (es - eb) / eb;

  const bool bands = std::abs(eb - 13165.0) <= 0.05 * 13165.0 &&
                     std::abs(es - 13481.0) <= 0.05 * 13481.0 &&
                     std::abs(ec - 13481.0) <= 0.05 * 13481.0;
  const bool equal = std::abs(es - ec) <= 0.002 * std::max(es, ec);
  const bool geom = g.chord <= 1e-3 && g.twist <= 0.1;
  const bool impr = std::abs(improvement - 2.4) <= 1.0;
  const bool runtime = s1.total_s < 3600.0;
  report("criterion 3 (scenario 1, unbounded control)",
         bands && equal && geom && impr && runtime,
         fmt("E = %.0f / %.0f / %.0f kJ (targets 13165 / 13481 +-5%%); |Eseq-Eccd| %.2f%%;"
             " geometry gap %.4f m / %.3f deg (<= 0.001 / 0.1); improvement %+.1f"
             " (target +2.4+-1.0); %.0f s total",
             eb, es, ec, 100.0 * std::abs(es - ec) / es, g.chord, g.twist, improvement,
             s1.total_s));
}

void criterion_4(const ScenarioRuns& s2, const rotor::RotorSpec& baseline) {
  const double eb = s2.baseline.energy_kj;
  const double es = s2.sequential.energy_kj;
  const double ec = s2.ccd.energy_kj;
  const double imp_s = 100.0 * (es - eb) / eb;
  const double imp_c = 100.0 * (ec - eb) / eb;

  const auto ccd_spec = rotor::with_geometry(baseline, s2.ccd.geometry);
  const auto opt = bem::max_cp(ccd_spec, 9.0);

  const bool pass = std::abs(imp_s - 4.3) <= 1.5 && std::abs(imp_c - 4.9) <= 1.5 &&
                    ec >= es && std::abs(opt.lambda_star - 10.0) <= 1.0 &&
                    s2.ccd.saturation_fraction < s2.sequential.saturation_fraction;
  report("criterion 4 (scenario 2, u_max = 47 kN m)", pass,
         fmt("improvements %+.1f / %+.1f (targets +4.3+-1.5 / +4.9+-1.5); Eccd-Eseq %+.0f"
             " kJ; ccd lambda* %.2f (target 10+-1); saturation %.2f vs %.2f",
             imp_s, imp_c, ec - es, opt.lambda_star, s2.ccd.saturation_fraction,
             s2.sequential.saturation_fraction));
}

void criterion_5(const ScenarioRuns& s2, const pipelines::MethodResult& ccd_ramp_bounded,
                 const ScenarioRuns& s1, const pipelines::MethodResult& ccd_ramp_unbounded) {
  const auto g_bounded = gap(ccd_ramp_bounded.geometry, s2.ccd.geometry);
  const auto g_unbounded = gap(ccd_ramp_unbounded.geometry, s1.ccd.geometry);
  const bool pass =
      g_bounded.chord > 1e-2 && g_unbounded.chord <= 1e-3 && g_unbounded.twist <= 0.1;
  report("criterion 5 (flow-profile sensitivity)", pass,
         fmt("bounded ramp-vs-sinusoid chord gap %.3f m (> 0.01 required); unbounded gap"
             " %.4f m / %.3f deg (<= 0.001 / 0.1)",
             g_bounded.chord, g_unbounded.chord, g_unbounded.twist));
}

void criterion_6(const ScenarioRuns& s2, const rotor::RotorSpec& baseline,
                 const colloc::OcpConfig& cfg2) {
  // bounded CCD restarted from the sequential-optimal geometry
  pipelines::PipelineOptions options;
  options.lambda_seed = kScenarioSeed;
  const auto init =
      pipelines::DesignVector::from_geometry(s2.sequential.geometry, kScenarioSeed);
  const auto ccd_from_seq = pipelines::run_ccd(baseline, sinusoid(), cfg2, init, options);
  const auto g = gap(ccd_from_seq.geometry, s2.ccd.geometry);
  const bool pass = g.chord <= 1e-3 && g.twist <= 0.1;
  report("criterion 6 (initial-geometry sensitivity)", pass,
         fmt("ccd from baseline vs from sequential geometry: gap %.4f m / %.3f deg"
             " (<= 0.001 / 0.1)",
             g.chord, g.twist));
}

// ---------------------------------------------------------------------------
// criterion 7: property suite

struct PolyModel {
  double a2 = 0.0, a1 = 0.0, a0 = 0.0;
  int integrand_power = 3;
  int n_geom() const { return 0; }
  void geom_bounds(std::span<double>, std::span<double>) const {}
  colloc::Scales scales(const colloc::OcpConfig&) const { return {}; }
  int cache_slots() const { return 0; }
  template <class T>
  void node(int, double t, const T&, const T&, std::span<const T>, T& xdot, T& p,
            std::span<double>) const {
    xdot = T(a2 * t * t + a1 * t + a0);
    p = T(std::pow(t, integrand_power));
  }
};

bool prop_hermite_simpson(std::string& detail) {
  PolyModel m;
  m.a2 = 1.5;
  m.a1 = -2.0;
  m.a0 = 0.75;
  colloc::OcpConfig cfg;
  cfg.horizon = 6.0;
  cfg.num_segments = 5;
  auto t = colloc::transcribe_model(std::make_shared<const PolyModel>(m), cfg);
  auto x_exact = [](double tt) { return 0.5 * tt * tt * tt - tt * tt + 0.75 * tt + 0.5; };
  const int nn = t.layout.n_nodes();
  std::vector<double> omega(nn), u(nn, 0.0);
  for (int j = 0; j < nn; ++j) omega[j] = x_exact(t.node_times[j]);
  std::vector<double> c(t.layout.num_eq());
  const double obj = t.problem.eval(t.pack(omega, u, {}), c);
  double dmax = 0.0;
  for (double ck : c) dmax = std::max(dmax, std::abs(ck));
  const double exact = std::pow(6.0, 4) / 4.0;
  const double qerr = std::abs(obj - exact) / exact;
  detail = fmt("max defect %.2e (<= 1e-12), quadrature rel err %.2e (<= 1e-12)", dmax, qerr);
  return dmax <= 1e-12 && qerr <= 1e-12;
}

bool prop_ad_vs_fd(const rotor::RotorSpec& spec, std::string& detail) {
  const auto profile = sinusoid();
  colloc::OcpConfig cfg = make_cfg(6, 47000.0);
  auto t = colloc::transcribe(spec, profile, cfg, true);
  const auto x0 = colloc::mppt_initial_guess(t, spec, profile, 7.6);

  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::uniform_int_distribution<int> pick(0, t.problem.dim - 1);

  double worst = 0.0;
  std::vector<double> grad(t.problem.dim), c(t.problem.num_eq),
      jac(static_cast<size_t>(t.problem.num_eq) * t.problem.dim);
  std::vector<double> cp(t.problem.num_eq), cm(t.problem.num_eq);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x = x0;
    for (auto& xi : x) xi = std::clamp(xi + jitter(rng), 0.05, 10.0);
    double f = 0.0;
    t.problem.eval_grad(x, f, grad, c, jac);
    for (int rep = 0; rep < 3; ++rep) {
      const int i = pick(rng);
      const double h = 2e-7 * std::max(1.0, std::abs(x[i]));
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fp = t.problem.eval(xp, cp);
      const double fm = t.problem.eval(xm, cm);
      const double fd = (fp - fm) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(grad[i])});
      worst = std::max(worst, std::abs(grad[i] - fd) / scale);
      for (int k = 0; k < t.problem.num_eq; ++k) {
        const double jfd = (cp[k] - cm[k]) / (2.0 * h);
        const double jscale = std::max(1.0, std::abs(jfd));
        worst = std::max(
            worst,
            std::abs(jac[static_cast<size_t>(k) * t.problem.dim + i] - jfd) / jscale);
      }
    }
  }
  detail = fmt("worst AD-vs-FD relative error %.2e (<= 1e-6) over 20 perturbations", worst);
  return worst <= 1e-6;
}

bool prop_betz_reynolds(const rotor::RotorSpec& base, std::string& detail) {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> chord_scale(0.85, 1.15);
  std::uniform_real_distribution<double> twist_shift(-2.0, 2.0);
  std::uniform_real_distribution<double> lam_dist(3.0, 12.0);
  std::uniform_real_distribution<double> v_dist(0.6, 1.9);
  double worst_inv = 0.0, max_cp_seen = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = base;
    for (auto& s : spec.geometry.sections) {
      if (!s.is_design_free) continue;
      s.chord = std::min(1.0, s.chord * chord_scale(rng));
      s.twist_deg = std::clamp(s.twist_deg + twist_shift(rng), 0.0, 30.0);
    }
    const double lam = lam_dist(rng);
    const double v1 = v_dist(rng), v2 = v_dist(rng);
    const double r = spec.geometry.tip_radius;
    const auto a = bem::rotor_torque(spec, v1, lam * v1 / r);
    const auto b = bem::rotor_torque(spec, v2, lam * v2 / r);
    max_cp_seen = std::max({max_cp_seen, a.cp, b.cp});
    worst_inv = std::max(worst_inv, std::abs(a.cp - b.cp));
  }
  detail = fmt("max Cp %.4f (< 0.593), worst Reynolds-invariance gap %.2e (<= 1e-9)",
               max_cp_seen, worst_inv);
  return max_cp_seen < 0.593 && worst_inv <= 1e-9;
}

bool prop_bem_oracle(const rotor::RotorSpec& base, std::string& detail) {
  std::mt19937 rng(20240917);
  std::uniform_real_distribution<double> chord_scale(0.8, 1.2);
  std::uniform_real_distribution<double> twist_shift(-3.0, 3.0);
  std::uniform_real_distribution<double> v_dist(0.8, 1.8);
  std::uniform_real_distribution<double> lam_dist(4.0, 10.0);
  std::uniform_int_distribution<int> section_pick(3, 9);
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto spec = base;
    for (auto& s : spec.geometry.sections) {
      if (!s.is_design_free) continue;
      s.chord = std::min(1.0, s.chord * chord_scale(rng));
      s.twist_deg = std::clamp(s.twist_deg + twist_shift(rng), 0.0, 30.0);
    }
    const double v = v_dist(rng);
    const double omega = lam_dist(rng) * v / spec.geometry.tip_radius;
    const auto& section = spec.geometry.sections[section_pick(rng)];
    bem_oracle::Inputs in{section.r_mid, section.dr, spec.geometry.hub_radius,
                          spec.geometry.tip_radius, spec.num_blades, spec.fluid_density,
                          section.chord, section.twist_deg, v, omega,
                          &spec.polar_for(section)};
    const auto ref = bem_oracle::fixed_point(in);
    if (!ref.converged || std::abs(ref.dQ) < 1.0) continue;
    const auto loads = bem::solve_section(section, spec, v, omega);
    worst = std::max(worst, std::abs(loads.dQ - ref.dQ) / std::abs(ref.dQ));
    ++checked;
  }
  detail = fmt("worst section-torque deviation %.2f%% (<= 2%%) on %d converged instances",
               100.0 * worst, checked);
  return worst <= 0.02 && checked >= 30;
}

bool prop_mppt(const rotor::RotorSpec& spec, std::string& detail) {
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 40.0);
  colloc::OcpConfig cfg = make_cfg(8, kUnbounded);
  cfg.horizon = 40.0;
  const auto opt = bem::max_cp(spec, 8.0);
  auto result = pipelines::optimize_control(spec, profile, cfg, opt.lambda_star);
  const double omega_star = opt.lambda_star * 1.4 / spec.geometry.tip_radius;
  const double u_star = bem::rotor_torque(spec, 1.4, omega_star).torque;
  double worst_w = 0.0, worst_u = 0.0;
  for (size_t j = 0; j < result.trajectory.times.size(); ++j) {
    worst_w =
        std::max(worst_w, std::abs(result.trajectory.omega[j] - omega_star) / omega_star);
    worst_u = std::max(worst_u, std::abs(result.trajectory.u[j] - u_star) / u_star);
  }
  detail = fmt("lambda deviation %.2f%%, torque deviation %.2f%% (<= 1%% each)",
               100.0 * worst_w, 100.0 * worst_u);
  return worst_w <= 0.01 && worst_u <= 0.01;
}

bool prop_resim(const std::vector<const pipelines::MethodResult*>& entries,
                std::string& detail) {
  double worst = 0.0;
  int n = 0;
  for (const auto* e : entries) {
    if (e->trajectory.times.empty()) continue;
    worst = std::max(worst, std::abs(e->resim_energy_kj - e->energy_kj) /
                                std::max(1.0, e->energy_kj));
    ++n;
  }
  detail = fmt("worst re-simulation energy gap %.3f%% (<= 0.5%%) over %d runs",
               100.0 * worst, n);
  return worst <= 0.005 && n > 0;
}

struct BoundQuadratic {
  template <class T>
  T operator()(std::span<const T> x, std::span<T>) const {
    return -(x[0] - 3.0) * (x[0] - 3.0);
  }
};
struct EqQuadratic {
  template <class T>
  T operator()(std::span<const T> x, std::span<T> c) const {
    c[0] = x[0] + x[1] - 1.0;
    return -(x[0] * x[0] + x[1] * x[1]);
  }
};
struct NegRosenbrock {
  template <class T>
  T operator()(std::span<const T> x, std::span<T>) const {
    const T a = 1.0 - x[0];
    const T b = x[1] - x[0] * x[0];
    return -(a * a + 100.0 * b * b);
  }
};

bool prop_nlp_units(std::string& detail) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto p1 = nlp::make_ad_problem(1, 0, {-inf}, {2.0}, BoundQuadratic{});
  const double x1[] = {0.0};
  const auto s1 = nlp::solve(p1, x1);
  const auto p2 = nlp::make_ad_problem(2, 1, {-inf, -inf}, {inf, inf}, EqQuadratic{});
  const double x2[] = {3.0, -1.0};
  const auto s2 = nlp::solve(p2, x2);
  const auto p3 = nlp::make_ad_problem(2, 0, {-inf, -inf}, {inf, inf}, NegRosenbrock{});
  const double x3[] = {-1.2, 1.0};
  const auto s3 = nlp::solve(p3, x3);
  const bool ok = s1.status == nlp::NlpSolution::Status::converged &&
                  std::abs(s1.x[0] - 2.0) <= 1e-6 &&
                  s2.status == nlp::NlpSolution::Status::converged &&
                  s2.feasibility <= 1e-6 && s2.optimality <= 1e-6 &&
                  s3.status == nlp::NlpSolution::Status::converged &&
                  std::abs(s3.x[0] - 1.0) <= 1e-6 && std::abs(s3.x[1] - 1.0) <= 1e-6;
  detail = fmt("bound quadratic x=%.6f; eq quadratic feas %.1e opt %.1e; Rosenbrock"
               " (%.6f, %.6f)",
               s1.x[0], s2.feasibility, s2.optimality, s3.x[0], s3.x[1]);
  return ok;
}

void criterion_7(const rotor::RotorSpec& baseline,
                 const std::vector<const pipelines::MethodResult*>& pipeline_entries) {
  std::string d1, d2, d3, d4, d5, d6, d7;
  const bool p1 = prop_hermite_simpson(d1);
  const bool p2 = prop_ad_vs_fd(baseline, d2);
  const bool p3 = prop_betz_reynolds(baseline, d3);
  const bool p4 = prop_bem_oracle(baseline, d4);
  const bool p5 = prop_mppt(baseline, d5);
  const bool p6 = prop_resim(pipeline_entries, d6);
  const bool p7 = prop_nlp_units(d7);
  const bool pass = p1 && p2 && p3 && p4 && p5 && p6 && p7;
  report("criterion 7 (property suite)", pass, "details below");
  std::printf("     [%s] %s\n     [%s] %s\n     [%s] %s\n     [%s] %s\n     [%s] %s\n"
              "     [%s] %s\n     [%s] %s\n",
              p1 ? "ok" : "FAIL", d1.c_str(), p2 ? "ok" : "FAIL", d2.c_str(),
              p3 ? "ok" : "FAIL", d3.c_str(), p4 ? "ok" : "FAIL", d4.c_str(),
              p5 ? "ok" : "FAIL", d5.c_str(), p6 ? "ok" : "FAIL", d6.c_str(),
              p7 ? "ok" : "FAIL", d7.c_str());
}

void criterion_8(const std::vector<const pipelines::MethodResult*>& entries) {
  std::string times;
  for (const auto* e : entries) times += fmt(" %s=%.0fs", e->method.c_str(), e->wall_time_s);
  report("criterion 8 (wall times informational only)", true,
         "computation times reported, never asserted:" + times);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const auto baseline = rotor::build_scaled_baseline(kDataDir);

  std::printf("acceptance suite (%s)\n", quick ? "quick: reduced mesh, property checks"
                                               : "full: default 30-segment mesh");

  criterion_1(baseline);

  if (quick) {
    report_skip("criterion 2", "quick mode runs property checks only");
    report_skip("criterion 3", "quick mode runs property checks only");
    report_skip("criterion 4", "quick mode runs property checks only");
    report_skip("criterion 5", "quick mode runs property checks only");
    report_skip("criterion 6", "quick mode runs property checks only");
    // one reduced-mesh pipeline run so the re-simulation property has data
    auto cfg = make_cfg(10, 47000.0);
    pipelines::PipelineOptions options;
    options.lambda_seed = kScenarioSeed;
    const auto init =
        pipelines::DesignVector::from_geometry(baseline.geometry, kScenarioSeed);
    const auto one = pipelines::run_sequential(baseline, sinusoid(), cfg, init, options);
    criterion_7(baseline, {&one});
    criterion_8({&one});
  } else {
    criterion_2(baseline);

    const auto cfg1 = make_cfg(30, kUnbounded);
    const auto cfg2 = make_cfg(30, 47000.0);

    std::printf("  .. running scenario 1 (sinusoidal, unbounded)\n");
    std::fflush(stdout);
    const auto s1 = run_scenario(baseline, sinusoid(), cfg1, kScenarioSeed);
    criterion_3(s1);

    std::printf("  .. running scenario 2 (sinusoidal, bounded)\n");
    std::fflush(stdout);
    const auto s2 = run_scenario(baseline, sinusoid(), cfg2, kScenarioSeed);
    criterion_4(s2, baseline);

    std::printf("  .. running ramp-profile CCD runs\n");
    std::fflush(stdout);
    pipelines::PipelineOptions options;
    options.lambda_seed = kScenarioSeed;
    // the unbounded ramp run must settle all the way onto the shared
    // optimum for the geometry-agreement check, so give it extra budget
    options.solver.max_total_inner = 250000;
    options.solver.max_inner_per_outer = 6000;
    const auto init =
        pipelines::DesignVector::from_geometry(baseline.geometry, kScenarioSeed);
    pipelines::MethodResult ccd_ramp_bounded, ccd_ramp_unbounded;
    std::thread tr(
        [&] { ccd_ramp_bounded = pipelines::run_ccd(baseline, ramp(), cfg2, init, options); });
    ccd_ramp_unbounded = pipelines::run_ccd(baseline, ramp(), cfg1, init, options);
    tr.join();
    criterion_5(s2, ccd_ramp_bounded, s1, ccd_ramp_unbounded);

    std::printf("  .. running criterion 6 CCD restart\n");
    std::fflush(stdout);
    criterion_6(s2, baseline, cfg2);

    const std::vector<const pipelines::MethodResult*> entries = {
        &s1.baseline,   &s1.sequential, &s1.ccd,           &s2.baseline,
        &s2.sequential, &s2.ccd,        &ccd_ramp_bounded, &ccd_ramp_unbounded};
    criterion_7(baseline, entries);
    criterion_8(entries);
  }

  int failures = 0;
  for (const auto& c : g_checks)
    if (!c.pass && !c.skipped) ++failures;
  std::printf("%d/%zu criteria passed%s\n", static_cast<int>(g_checks.size()) - failures,
              g_checks.size(), failures == 0 ? " - acceptance clean" : "");
  return failures == 0 ? 0 : 1;
}
