#include <doctest.h>

#include <cmath>

#include "hkt/bem.hpp"
#include "hkt/pipelines.hpp"

using namespace hkt;

namespace {

const std::filesystem::path kDataDir = HKT_TEST_DATA_DIR;

rotor::RotorSpec baseline() { return rotor::build_scaled_baseline(kDataDir); }

pipelines::MethodResult stub_entry(const std::string& method, double energy,
                                   const dyn::FlowProfile& profile,
                                   const colloc::OcpConfig& cfg) {
  pipelines::MethodResult m;
  m.method = method;
  m.energy_kj = energy;
  m.profile = profile;
  m.cfg = cfg;
  m.status = nlp::NlpSolution::Status::converged;
  return m;
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

}  // namespace

TEST_CASE("compare reproduces the published improvement percentages") {
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.2, 0.1, 150.0);
  colloc::OcpConfig cfg;

  SUBCASE("unbounded-control scenario") {
    auto report = pipelines::compare({stub_entry("baseline", 13165, profile, cfg),
                                      stub_entry("sequential", 13481, profile, cfg),
                                      stub_entry("ccd", 13481, profile, cfg)});
    CHECK(report.entries[0].improvement_pct == 0.0);
    CHECK(round1(report.entries[1].improvement_pct) == doctest::Approx(2.4));
    CHECK(round1(report.entries[2].improvement_pct) == doctest::Approx(2.4));
  }

  SUBCASE("bounded-control scenario") {
    colloc::OcpConfig b = cfg;
    b.u_max = 47000.0;
    auto report = pipelines::compare({stub_entry("baseline", 12839, profile, b),
                                      stub_entry("sequential", 13398, profile, b),
                                      stub_entry("ccd", 13464, profile, b)});
    CHECK(round1(report.entries[1].improvement_pct) == doctest::Approx(4.4).epsilon(0.03));
    CHECK(round1(report.entries[2].improvement_pct) == doctest::Approx(4.9).epsilon(0.03));
  }

  SUBCASE("duplicated baseline gives zero improvements") {
    auto report = pipelines::compare({stub_entry("baseline", 13165, profile, cfg),
                                      stub_entry("baseline", 13165, profile, cfg)});
    CHECK(report.entries[0].improvement_pct == 0.0);
    CHECK(report.entries[1].improvement_pct == 0.0);
  }

  SUBCASE("mismatched metadata is rejected") {
    const auto other = dyn::FlowProfile::ramp(1.55, 0.2, 0.1, 0.7, 150.0);
    CHECK_THROWS_AS(pipelines::compare({stub_entry("baseline", 1.0, profile, cfg),
                                        stub_entry("ccd", 1.1, other, cfg)}),
                    ConfigError);
    colloc::OcpConfig c2 = cfg;
    c2.num_segments = 12;
    CHECK_THROWS_AS(pipelines::compare({stub_entry("baseline", 1.0, profile, cfg),
                                        stub_entry("ccd", 1.1, profile, c2)}),
                    ConfigError);
  }
}

TEST_CASE("saturation fraction counts time at the bound") {
  dyn::Trajectory traj;
  traj.times = {0.0, 1.0, 2.0, 3.0, 4.0};
  traj.u = {47000.0, 47000.0, 46990.0, 10.0, 47000.0};
  const double frac = pipelines::saturation_fraction(traj, 47000.0);
  CHECK(frac == doctest::Approx((1.0 + 0.5 + 0.0 + 0.5) / 4.0));
  CHECK(pipelines::saturation_fraction(traj,
                                       std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("design vector round-trips through a geometry") {
  const auto spec = baseline();
  auto d = pipelines::DesignVector::from_geometry(spec.geometry, 8.0);
  REQUIRE(d.chords.size() == 7);
  d.chords[3] *= 1.1;
  d.twists[2] += 2.0;
  const auto geo = d.apply_to(spec.geometry);
  const auto back = pipelines::DesignVector::from_geometry(geo, 8.0);
  for (size_t i = 0; i < d.chords.size(); ++i) {
    CHECK(back.chords[i] == doctest::Approx(d.chords[i]));
    CHECK(back.twists[i] == doctest::Approx(d.twists[i]));
  }
  // cylinders untouched
  CHECK(geo.sections[0].chord == spec.geometry.sections[0].chord);
}

TEST_CASE("constant-flow optimal control tracks the maximum power point") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 40.0);
  colloc::OcpConfig cfg;
  cfg.horizon = 40.0;
  cfg.num_segments = 8;

  const auto opt = bem::max_cp(spec, 8.0);
  auto result = pipelines::optimize_control(spec, profile, cfg, opt.lambda_star);
  // piecewise-linear polars park optima on interpolation-node kink faces, so
  // the one-sided optimality measure may plateau; feasibility must not
  REQUIRE(result.solution.status != nlp::NlpSolution::Status::failure);
  REQUIRE(result.solution.feasibility <= 1e-6);

  const double omega_star = opt.lambda_star * 1.4 / spec.geometry.tip_radius;
  const double u_star = bem::rotor_torque(spec, 1.4, omega_star).torque;
  const auto& traj = result.trajectory;
  for (size_t j = 0; j < traj.times.size(); ++j) {
    CHECK(std::abs(traj.omega[j] - omega_star) <= 0.01 * omega_star);
    CHECK(std::abs(traj.u[j] - u_star) <= 0.01 * u_star);
  }

  // re-simulation agreement
  const auto control = colloc::control_interpolant(traj);
  const auto resim = dyn::simulate(spec, profile, control, traj.omega.front(), 0.05);
  CHECK(resim.final_energy_kj() ==
        doctest::Approx(traj.energy.back() / 1000.0).epsilon(0.005));
}

TEST_CASE("steady design improves on the baseline and is a solver fixed point") {
  const auto spec = baseline();
  const auto init = pipelines::DesignVector::from_geometry(spec.geometry, 8.0);
  const auto first = pipelines::optimize_steady_design(spec, init);
  REQUIRE(first.solution.status != nlp::NlpSolution::Status::failure);

  const auto base_opt = bem::max_cp(spec, 8.0);
  CHECK(first.cp_star > base_opt.cp_star);

  const auto geo = first.design.apply_to(spec.geometry);
  CHECK(rotor::validate_bounds(geo).empty());

  auto again = pipelines::optimize_steady_design(spec, first.design);
  for (size_t i = 0; i < first.design.chords.size(); ++i) {
    CHECK(std::abs(again.design.chords[i] - first.design.chords[i]) < 1e-4);
    CHECK(std::abs(again.design.twists[i] - first.design.twists[i]) < 30.0 * 1e-4);
  }
  CHECK(std::abs(again.cp_star - first.cp_star) < 1e-5);
}

TEST_CASE("u_max = 0 is the degenerate freewheeling case") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 20.0);
  colloc::OcpConfig cfg;
  cfg.horizon = 20.0;
  cfg.num_segments = 4;
  cfg.u_max = 0.0;

  pipelines::PipelineOptions options;
  options.lambda_seed = 7.7;
  options.resimulate = false;
  const auto result = pipelines::run_baseline(spec, profile, cfg, options);
  for (double u : result.trajectory.u) CHECK(u == 0.0);
  bool flagged = false;
  for (const auto& n : result.notes)
    if (n.find("degenerate") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("doubling the segment count barely moves the converged objective") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.2, 0.1, 60.0);
  colloc::OcpConfig coarse;
  coarse.horizon = 60.0;
  coarse.num_segments = 6;
  colloc::OcpConfig fine = coarse;
  fine.num_segments = 12;

  const auto a = pipelines::optimize_control(spec, profile, coarse, 7.7);
  const auto b = pipelines::optimize_control(spec, profile, fine, 7.7);
  const double ea = a.trajectory.energy.back();
  const double eb = b.trajectory.energy.back();
  CHECK(std::abs(ea - eb) < 0.002 * std::abs(eb));
}
