#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hkt/dual.hpp"
#include "hkt/errors.hpp"
#include "hkt/rotor_model.hpp"

namespace hkt::bem {

// Converged per-section solution. dT/dQ are per blade for the whole section
// (already integrated over its span dr).
struct SectionLoads {
  double a = 0.0;    // axial induction factor
  double a_t = 0.0;  // tangential induction factor
  double phi = 0.0;  // inflow angle, rad
  double dT = 0.0;   // thrust, N
  double dQ = 0.0;   // torque, N m
};

struct RotorLoads {
  double torque = 0.0;  // N m
  double thrust = 0.0;  // N
  double power = 0.0;   // W
  double cp = 0.0;      // power / (0.5 rho A v^3), A = pi r_tip^2
  std::vector<SectionLoads> sections;
};

// Non-differentiable per-section context.
struct SectionContext {
  double r = 0.0;           // section midpoint radius, m
  double dr = 0.0;          // section span, m
  double hub_radius = 0.0;
  double tip_radius = 0.0;
  int num_blades = 3;
  double rho = 1000.0;
  const rotor::AirfoilPolar* polar = nullptr;
};

// Differentiable per-section inputs.
template <class T>
struct SectionVars {
  T chord;
  T twist_deg;
  T v;
  T omega;
};

template <class T>
struct PhiState {
  T residual;
  T a;
  T a_t;
  T cn;
  T ct;
};

template <class T>
struct SectionState {
  T a, a_t, phi, dT, dQ;
};

namespace detail {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFloorF = 1e-4;    // combined loss factor floor
constexpr double kLambdaRMin = 1e-9;  // below this treat as parked rotor

template <class T>
T clamp_min(const T& x, double lo) {
  return x < lo ? T(lo) : x;
}
}  // namespace detail

// Momentum/blade-force balance at a trial inflow angle. One-equation
// residual in phi with Prandtl tip+hub losses and the Buhl high-induction
// correction; the tangential term is written pole-free so Brent never sees
// an infinity inside the primary bracket.
template <class T>
PhiState<T> phi_state(const SectionContext& c, const SectionVars<T>& sv, const T& phi) {
  using std::abs;
  using std::acos;
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;
  using ad::abs;
  using ad::acos;
  using ad::cos;
  using ad::exp;
  using ad::sin;
  using ad::sqrt;
  using ad::value;

  PhiState<T> st{};
  const T sphi = sin(phi);
  const T cphi = cos(phi);
  const T lambda_r = sv.omega * c.r / sv.v;

  const T alpha = phi * (180.0 / detail::kPi) - sv.twist_deg;
  T cl{}, cd{};
  c.polar->lookup(alpha, cl, cd);
  st.cn = cl * cphi + cd * sphi;
  st.ct = cl * sphi - cd * cphi;

  const T s_abs = detail::clamp_min(abs(sphi), 1e-9);
  const double b_half = 0.5 * c.num_blades;
  const T f_tip = b_half * (c.tip_radius - c.r) / (c.r * s_abs);
  const T f_hub = b_half * (c.r - c.hub_radius) / (c.r * s_abs);
  T loss = (2.0 / detail::kPi) * acos(exp(-f_tip)) * (2.0 / detail::kPi) * acos(exp(-f_hub));
  loss = detail::clamp_min(loss, detail::kFloorF);

  const T sigma = c.num_blades * sv.chord / (2.0 * detail::kPi * c.r);
  const T k = sigma * st.cn / (4.0 * loss * sphi * sphi);

  T a;
  if (value(phi) > 0.0) {
    if (value(k) <= 2.0 / 3.0) {
      a = k / (1.0 + k);
    } else {
      // Buhl empirical relation for the turbulent-wake state
      const T g1 = 2.0 * loss * k - (10.0 / 9.0 - loss);
      const T g2 = 2.0 * loss * k - loss * (4.0 / 3.0 - loss);
      const T g3 = 2.0 * loss * k - (25.0 / 9.0 - 2.0 * loss);
      if (std::abs(value(g3)) < 1e-6)
        a = 1.0 - 1.0 / (2.0 * sqrt(g2));
      else
        a = (g1 - sqrt(g2)) / g3;
    }
  } else {
    // propeller-brake region
    if (value(k) > 1.0)
      a = k / (k - 1.0);
    else
      a = T(0.0);
  }
  st.a = a;

  const T kp = sigma * st.ct / (4.0 * loss * sphi * cphi);
  st.a_t = kp / (1.0 - kp);

  // residual: sin(phi)/(1-a) - cos(phi)/(lambda_r (1+a'))
  // with cos(phi)/(1+a') expanded to cos(phi) - sigma ct / (4 F sin(phi))
  st.residual = sphi / (1.0 - a) - (cphi - sigma * st.ct / (4.0 * loss * sphi)) / lambda_r;
  return st;
}

template <class T>
SectionState<T> loads_at_phi(const SectionContext& c, const SectionVars<T>& sv,
                             const T& phi, const PhiState<T>& st) {
  const T u_ax = sv.v * (1.0 - st.a);
  const T u_tn = sv.omega * c.r * (1.0 + st.a_t);
  const T w2 = u_ax * u_ax + u_tn * u_tn;
  const T q = 0.5 * c.rho * w2 * sv.chord;
  SectionState<T> out;
  out.a = st.a;
  out.a_t = st.a_t;
  out.phi = phi;
  out.dT = q * st.cn * c.dr;
  out.dQ = q * st.ct * c.r * c.dr;
  return out;
}

// Root of phi_state(...).residual in phi; |R| <= 1e-10 at the returned
// angle. Throws SolverError after the extended-bracket fallbacks fail.
double solve_phi(const SectionContext& c, const SectionVars<double>& sv);

SectionState<double> section_loads(const SectionContext& c, const SectionVars<double>& sv,
                                   double* phi_cache = nullptr);
SectionState<ad::Dual> section_loads(const SectionContext& c,
                                     const SectionVars<ad::Dual>& sv,
                                     double* phi_cache = nullptr);

SectionContext make_context(const rotor::BladeSection& section, const rotor::RotorSpec& spec);

// Spec-level entry points.
SectionLoads solve_section(const rotor::BladeSection& section, const rotor::RotorSpec& spec,
                           double v, double omega);
double section_residual(const rotor::BladeSection& section, const rotor::RotorSpec& spec,
                        double v, double omega, double phi);
RotorLoads rotor_torque(const rotor::RotorSpec& spec, double v, double omega);

struct CpPoint {
  double lambda = 0.0;
  double cp = 0.0;
  bool ok = true;
  std::string error;
};

// Cp over tip-speed ratios at a reference speed (Reynolds-invariant polars
// make the result independent of it). Failed points are reported, not
// dropped.
std::vector<CpPoint> cp_curve(const rotor::RotorSpec& spec, std::span<const double> lambdas,
                              double v_ref = 1.4);

struct CpOptimum {
  double cp_star = 0.0;
  double lambda_star = 0.0;
};

// Local maximum of Cp(lambda): uphill grid walk from the initial guess to
// bracket, then golden-section to |lambda| resolution <= 0.01.
CpOptimum max_cp(const rotor::RotorSpec& spec, double lambda_init);

template <class T>
struct RotorEvalT {
  T torque, thrust, power, cp;
};

// Differentiable whole-rotor evaluation with the free-section chords and
// twists as inputs. The dual overload of section_loads differentiates the
// converged BEM solution implicitly, so this is the Q = g(c_i, alpha_i, v,
// lambda) surface the optimizers see.
class RotorEvaluator {
 public:
  explicit RotorEvaluator(const rotor::RotorSpec& spec)
      : spec_(&spec), free_(spec.geometry.free_section_indices()) {
    for (const auto& s : spec.geometry.sections) contexts_.push_back(make_context(s, spec));
  }

  int n_free() const { return static_cast<int>(free_.size()); }
  int n_sections() const { return static_cast<int>(contexts_.size()); }
  const std::vector<int>& free_indices() const { return free_; }
  const rotor::RotorSpec& spec() const { return *spec_; }

  // phi_cache: optional, size n_sections(). Filled by double evaluations,
  // consumed by dual evaluations at the same point (NaN = no root solve on
  // that section's path).
  template <class T>
  RotorEvalT<T> evaluate(std::span<const T> free_chords, std::span<const T> free_twists,
                         const T& v, const T& omega,
                         std::span<double> phi_cache = {}) const {
    const auto& sections = spec_->geometry.sections;
    T torque(0.0), thrust(0.0);
    int next_free = 0;
    for (size_t i = 0; i < sections.size(); ++i) {
      SectionVars<T> sv;
      if (sections[i].is_design_free && !free_chords.empty()) {
        sv.chord = free_chords[next_free];
        sv.twist_deg = free_twists[next_free];
      } else {
        sv.chord = T(sections[i].chord);
        sv.twist_deg = T(sections[i].twist_deg);
      }
      if (sections[i].is_design_free) ++next_free;
      sv.v = v;
      sv.omega = omega;
      double* slot = phi_cache.empty() ? nullptr : &phi_cache[i];
      const auto state = section_loads(contexts_[i], sv, slot);
      torque += state.dQ;
      thrust += state.dT;
    }
    RotorEvalT<T> out;
    out.torque = double(spec_->num_blades) * torque;
    out.thrust = double(spec_->num_blades) * thrust;
    out.power = out.torque * omega;
    const double area = detail::kPi * spec_->geometry.tip_radius * spec_->geometry.tip_radius;
    out.cp = out.power / (0.5 * spec_->fluid_density * area * v * v * v);
    return out;
  }

 private:
  const rotor::RotorSpec* spec_;
  std::vector<int> free_;
  std::vector<SectionContext> contexts_;
};

}  // namespace hkt::bem
