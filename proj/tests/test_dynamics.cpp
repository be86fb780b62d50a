#include <doctest.h>

#include <cmath>

#include "hkt/bem.hpp"
#include "hkt/dynamics.hpp"

using namespace hkt;

namespace {

const std::filesystem::path kDataDir = HKT_TEST_DATA_DIR;

rotor::RotorSpec baseline() { return rotor::build_scaled_baseline(kDataDir); }

dyn::FlowProfile study_sinusoid(double duration = 150.0) {
  return dyn::FlowProfile::sinusoidal(1.4, 0.2, 0.1, duration);
}

dyn::FlowProfile study_ramp(double duration = 150.0) {
  return dyn::FlowProfile::ramp(1.55, 0.2, 0.1, 0.7, duration);
}

}  // namespace

TEST_CASE("flow profile formulas evaluate exactly") {
  const auto sin_p = study_sinusoid();
  CHECK(dyn::flow_velocity(sin_p, 0.0) == doctest::Approx(1.4));
  CHECK(dyn::flow_velocity(sin_p, 5.0 * M_PI) == doctest::Approx(1.6));

  const auto ramp_p = study_ramp();
  CHECK(dyn::flow_velocity(ramp_p, 0.0) == doctest::Approx(1.55));
  CHECK(dyn::flow_velocity(ramp_p, 150.0) ==
        doctest::Approx(1.55 - 0.2 * std::pow(15.0, 0.7)));

  CHECK_THROWS_AS(dyn::flow_velocity(sin_p, -1.0), DomainError);
  CHECK_THROWS_AS(dyn::flow_velocity(sin_p, 151.0), DomainError);
}

TEST_CASE("study profiles stay within the positivity guard band") {
  for (const auto& profile : {study_sinusoid(), study_ramp()}) {
    for (int i = 0; i <= 1500; ++i) {
      const double v = dyn::flow_velocity(profile, 150.0 * i / 1500);
      CHECK(v >= 0.1);
      CHECK(v <= 2.0);
    }
  }
}

TEST_CASE("tabulated profiles interpolate linearly") {
  const auto p = dyn::FlowProfile::tabulated({{0.0, 1.0}, {10.0, 2.0}, {20.0, 1.5}});
  CHECK(dyn::flow_velocity(p, 5.0) == doctest::Approx(1.5));
  CHECK(dyn::flow_velocity(p, 15.0) == doctest::Approx(1.75));
}

TEST_CASE("profile validation rejects non-positive speeds") {
  CHECK_THROWS_AS(dyn::FlowProfile::sinusoidal(0.5, 0.6, 0.1, 100.0), ConfigError);
  CHECK_THROWS_AS(dyn::FlowProfile::ramp(1.0, 0.5, 0.1, 1.0, 150.0), ConfigError);
}

TEST_CASE("rotor acceleration arithmetic") {
  auto spec = baseline();
  CHECK(dyn::rotor_accel(spec, 49468.0, 47234.0) == doctest::Approx(1.0));
  CHECK(dyn::rotor_accel(spec, 1234.5, 1234.5) == 0.0);
  CHECK(dyn::rotor_accel(spec, 100.0, 200.0) < 0.0);
}

TEST_CASE("energy bookkeeping") {
  dyn::Trajectory traj;
  for (int i = 0; i <= 150; ++i) {
    traj.times.push_back(i);
    traj.power.push_back(100e3);
  }
  CHECK(dyn::energy_kj(traj) == doctest::Approx(15000.0));
  for (auto& p : traj.power) p = 0.0;
  CHECK(dyn::energy_kj(traj) == 0.0);
}

TEST_CASE("steady MPPT operation is a fixed point of the simulator") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 30.0);
  const auto opt = bem::max_cp(spec, 8.0);
  const double omega_star = opt.lambda_star * 1.4 / spec.geometry.tip_radius;
  const double u_star = bem::rotor_torque(spec, 1.4, omega_star).torque;

  const auto traj =
      dyn::simulate(spec, profile, [&](double) { return u_star; }, omega_star, 0.05);
  for (double w : traj.omega) CHECK(std::abs(w - omega_star) < 1e-6);
  CHECK(std::abs(traj.q.back() - u_star) < 1e-6 * u_star);
  CHECK(traj.final_energy_kj() ==
        doctest::Approx(u_star * omega_star * 30.0 / 1000.0).epsilon(1e-6));
}

TEST_CASE("unloaded rotor runs away toward the zero-torque tip speed ratio") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 60.0);
  const auto opt = bem::max_cp(spec, 8.0);
  const double omega0 = opt.lambda_star * 1.4 / spec.geometry.tip_radius;

  // zero-torque lambda by bisection on the rotor torque
  double lo = opt.lambda_star, hi = 25.0;
  auto q_at = [&](double lam) {
    return bem::rotor_torque(spec, 1.4, lam * 1.4 / spec.geometry.tip_radius).torque;
  };
  REQUIRE(q_at(lo) > 0.0);
  REQUIRE(q_at(hi) < 0.0);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q_at(mid) > 0.0 ? lo : hi) = mid;
  }
  const double lambda_runaway = 0.5 * (lo + hi);

  const auto traj = dyn::simulate(spec, profile, [](double) { return 0.0; }, omega0, 0.05);
  for (size_t i = 1; i < traj.omega.size(); ++i) CHECK(traj.omega[i] >= traj.omega[i - 1]);
  const double lambda_end = traj.omega.back() * spec.geometry.tip_radius / 1.4;
  CHECK(lambda_end > opt.lambda_star);
  CHECK(lambda_end <= lambda_runaway + 0.05);
  CHECK(lambda_end > 0.9 * lambda_runaway);
}

TEST_CASE("RK4 self-convergence on the study sinusoid") {
  const auto spec = baseline();
  const auto profile = study_sinusoid(20.0);
  const double omega0 = 7.6 * 1.4 / spec.geometry.tip_radius;
  auto control = [](double) { return 40000.0; };
  const auto coarse = dyn::simulate(spec, profile, control, omega0, 0.04);
  const auto fine = dyn::simulate(spec, profile, control, omega0, 0.02);
  CHECK(std::abs(fine.final_energy_kj() - coarse.final_energy_kj()) <
        1e-4 * std::abs(fine.final_energy_kj()));
}

TEST_CASE("RK4 order: halving dt cuts the omega error about sixteenfold") {
  // decay of a small speed offset toward the torque-balance equilibrium; the
  // short horizon keeps the transient alive so the error is measurable
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 0.3);
  const auto opt = bem::max_cp(spec, 8.0);
  const double omega_star = opt.lambda_star * 1.4 / spec.geometry.tip_radius;
  const double u_star = bem::rotor_torque(spec, 1.4, omega_star).torque;
  const double omega0 = 1.005 * omega_star;
  auto control = [&](double) { return u_star; };

  const auto ref = dyn::simulate(spec, profile, control, omega0, 0.3 / 80);
  const auto h1 = dyn::simulate(spec, profile, control, omega0, 0.3 / 10);
  const auto h2 = dyn::simulate(spec, profile, control, omega0, 0.3 / 20);
  const double e1 = std::abs(h1.omega.back() - ref.omega.back());
  const double e2 = std::abs(h2.omega.back() - ref.omega.back());
  REQUIRE(e2 > 0.0);
  const double ratio = e1 / e2;
  CHECK(ratio > 8.0);
  CHECK(ratio < 40.0);
}

TEST_CASE("simulate energy equals the trapezoid of its stored power") {
  const auto spec = baseline();
  const auto profile = study_sinusoid(15.0);
  const auto traj = dyn::simulate(
      spec, profile, [](double) { return 35000.0; },
      7.0 * 1.4 / spec.geometry.tip_radius, 0.1);
  CHECK(traj.final_energy_kj() == doctest::Approx(dyn::energy_kj(traj)).epsilon(1e-12));
}

TEST_CASE("omega clamps at zero with an event note") {
  const auto spec = baseline();
  const auto profile = dyn::FlowProfile::sinusoidal(1.4, 0.0, 0.0, 5.0);
  // braking torque far above anything the fluid can deliver
  const auto traj =
      dyn::simulate(spec, profile, [](double) { return 5e5; }, 0.5, 0.05);
  CHECK(traj.omega.back() == 0.0);
  REQUIRE(!traj.notes.empty());
  CHECK(traj.notes.front().find("clamped") != std::string::npos);
}
