#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hkt/rotor_model.hpp"

namespace hkt::dyn {

// Time-varying inflow speed v(t) on [0, duration].
struct FlowProfile {
  enum class Kind { sinusoidal, ramp, table };

  Kind kind = Kind::sinusoidal;
  double duration = 150.0;

  // sinusoidal: v(t) = mean + amplitude * sin(angular_rate * t)
  double mean = 0.0, amplitude = 0.0, angular_rate = 0.0;

  // ramp: v(t) = offset - gain * (rate * t)^exponent
  double offset = 0.0, gain = 0.0, rate = 0.0, exponent = 1.0;

  // table: piecewise-linear samples, must cover [0, duration]
  std::vector<std::pair<double, double>> samples;

  static FlowProfile sinusoidal(double mean, double amplitude, double angular_rate,
                                double duration);
  static FlowProfile ramp(double offset, double gain, double rate, double exponent,
                          double duration);
  static FlowProfile tabulated(std::vector<std::pair<double, double>> samples);

  // duration > 0 and v(t) > 0 (checked on a dense grid for the analytic
  // kinds, at the nodes for tables).
  void validate() const;
};

// Exact profile evaluation; throws DomainError outside [0, duration].
double flow_velocity(const FlowProfile& profile, double t);

// Discretized time histories on a node grid.
struct Trajectory {
  std::vector<double> times;   // s
  std::vector<double> omega;   // rad/s
  std::vector<double> u;       // control torque, N m
  std::vector<double> q;       // fluid torque, N m
  std::vector<double> power;   // W (= q * omega)
  std::vector<double> energy;  // cumulative J, trapezoidal
  std::vector<std::string> notes;

  double final_energy_kj() const {
    return energy.empty() ? 0.0 : energy.back() / 1000.0;
  }
};

// (q - u) / I_turbine
double rotor_accel(const rotor::RotorSpec& spec, double q, double u);

// Trapezoidal integral of power over times, reported in kJ.
double energy_kj(const Trajectory& traj);

// Classical RK4 forward integration of the rotor speed ODE with BEM torque.
// omega is clamped at zero from below (event recorded in notes). Used as an
// independent check on collocation solutions.
Trajectory simulate(const rotor::RotorSpec& spec, const FlowProfile& profile,
                    const std::function<double(double)>& control, double omega0,
                    double dt);

// Trajectory CSV: t_s,v_mps,omega_radps,u_Nm,Q_Nm,P_W,E_kJ
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                         const FlowProfile& profile);

}  // namespace hkt::dyn
