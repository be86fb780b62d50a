#include "hkt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hkt/bem.hpp"
#include "hkt/csv.hpp"
#include "hkt/errors.hpp"

namespace hkt::dyn {

FlowProfile FlowProfile::sinusoidal(double mean, double amplitude, double angular_rate,
                                    double duration) {
  FlowProfile p;
  p.kind = Kind::sinusoidal;
  p.mean = mean;
  p.amplitude = amplitude;
  p.angular_rate = angular_rate;
  p.duration = duration;
  p.validate();
  return p;
}

FlowProfile FlowProfile::ramp(double offset, double gain, double rate, double exponent,
                              double duration) {
  FlowProfile p;
  p.kind = Kind::ramp;
  p.offset = offset;
  p.gain = gain;
  p.rate = rate;
  p.exponent = exponent;
  p.duration = duration;
  p.validate();
  return p;
}

FlowProfile FlowProfile::tabulated(std::vector<std::pair<double, double>> samples) {
  FlowProfile p;
  p.kind = Kind::table;
  p.samples = std::move(samples);
  if (p.samples.size() < 2) throw ConfigError("table profile needs at least 2 samples");
  p.duration = p.samples.back().first;
  p.validate();
  return p;
}

namespace {

double eval_profile(const FlowProfile& p, double t) {
  switch (p.kind) {
    case FlowProfile::Kind::sinusoidal:
      return p.mean + p.amplitude * std::sin(p.angular_rate * t);
    case FlowProfile::Kind::ramp:
      return p.offset - p.gain * std::pow(p.rate * t, p.exponent);
    case FlowProfile::Kind::table: {
      const auto& s = p.samples;
      if (t <= s.front().first) return s.front().second;
      if (t >= s.back().first) return s.back().second;
      for (size_t i = 0; i + 1 < s.size(); ++i) {
        if (t >= s[i].first && t <= s[i + 1].first) {
          const double w = (t - s[i].first) / (s[i + 1].first - s[i].first);
          return s[i].second + w * (s[i + 1].second - s[i].second);
        }
      }
      return s.back().second;
    }
  }
  return 0.0;
}

}  // namespace

void FlowProfile::validate() const {
  if (!(duration > 0.0)) throw ConfigError("flow profile: duration must be positive");
  if (kind == Kind::table) {
    if (samples.size() < 2) throw ConfigError("table profile needs at least 2 samples");
    for (size_t i = 1; i < samples.size(); ++i)
      if (!(samples[i].first > samples[i - 1].first))
        throw ConfigError("table profile: times must be strictly increasing");
    if (samples.front().first > 1e-12 || samples.back().first < duration - 1e-12)
      throw ConfigError("table profile: samples must cover [0, duration]");
    for (const auto& [t, v] : samples)
      if (!(v > 0.0)) throw ConfigError("table profile: v must stay positive");
    return;
  }
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double t = duration * i / n;
    if (!(eval_profile(*this, t) > 0.0)) {
      std::ostringstream msg;
      msg << "flow profile: v(t) not positive at t=" << t;
      throw ConfigError(msg.str());
    }
  }
}

double flow_velocity(const FlowProfile& profile, double t) {
  if (t < -1e-12 || t > profile.duration + 1e-12) {
    std::ostringstream msg;
    msg << "flow_velocity: t=" << t << " outside [0, " << profile.duration << "]";
    throw DomainError(msg.str());
  }
  return eval_profile(profile, std::clamp(t, 0.0, profile.duration));
}

double rotor_accel(const rotor::RotorSpec& spec, double q, double u) {
  return (q - u) / spec.inertia;
}

double energy_kj(const Trajectory& traj) {
  double e = 0.0;
  for (size_t i = 1; i < traj.times.size(); ++i)
    e += 0.5 * (traj.power[i - 1] + traj.power[i]) * (traj.times[i] - traj.times[i - 1]);
  return e / 1000.0;
}

Trajectory simulate(const rotor::RotorSpec& spec, const FlowProfile& profile,
                    const std::function<double(double)>& control, double omega0,
                    double dt) {
  if (!(dt > 0.0)) throw ConfigError("simulate: dt must be positive");
  if (omega0 < 0.0) throw ConfigError("simulate: omega0 must be non-negative");

  Trajectory traj;
  bool clamped = false;

  auto torque_at = [&](double t, double omega) {
    const double v = flow_velocity(profile, std::min(t, profile.duration));
    return bem::rotor_torque(spec, v, std::max(omega, 0.0)).torque;
  };

  double t = 0.0, omega = omega0, energy = 0.0;
  double q = 0.0, p = 0.0, prev_p = 0.0;
  try {
    q = torque_at(0.0, omega);
  } catch (const Error& e) {
    throw SolverError("simulate: BEM failed at t=0: " + std::string(e.what()));
  }
  p = q * omega;
  traj.times.push_back(0.0);
  traj.omega.push_back(omega);
  traj.u.push_back(control(0.0));
  traj.q.push_back(q);
  traj.power.push_back(p);
  traj.energy.push_back(0.0);

  while (t < profile.duration - 1e-12) {
    const double h = std::min(dt, profile.duration - t);
    prev_p = p;
    try {
      const auto f = [&](double tt, double w) {
        return (torque_at(tt, w) - control(std::min(tt, profile.duration))) / spec.inertia;
      };
      const double k1 = f(t, omega);
      const double k2 = f(t + 0.5 * h, omega + 0.5 * h * k1);
      const double k3 = f(t + 0.5 * h, omega + 0.5 * h * k2);
      const double k4 = f(t + h, omega + h * k3);
      omega += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "simulate: BEM failed at t=" << t << ": " << e.what();
      throw SolverError(msg.str());
    }
    t += h;
    if (omega < 0.0) {
      omega = 0.0;
      if (!clamped) {
        std::ostringstream msg;
        msg << "omega clamped at zero from t=" << t;
        traj.notes.push_back(msg.str());
        clamped = true;
      }
    }
    q = torque_at(t, omega);
    p = q * omega;
    energy += 0.5 * (prev_p + p) * h;
    traj.times.push_back(t);
    traj.omega.push_back(omega);
    traj.u.push_back(control(std::min(t, profile.duration)));
    traj.q.push_back(q);
    traj.power.push_back(p);
    traj.energy.push_back(energy);
  }
  return traj;
}

void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                         const FlowProfile& profile) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(traj.times.size());
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double v = flow_velocity(profile, std::min(traj.times[i], profile.duration));
    rows.push_back({csv::format_double(traj.times[i]), csv::format_double(v),
                    csv::format_double(traj.omega[i]), csv::format_double(traj.u[i]),
                    csv::format_double(traj.q[i]), csv::format_double(traj.power[i]),
                    csv::format_double(traj.energy[i] / 1000.0)});
  }
  csv::write(path, {"t_s", "v_mps", "omega_radps", "u_Nm", "Q_Nm", "P_W", "E_kJ"}, rows);
}

}  // namespace hkt::dyn
