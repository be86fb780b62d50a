#include "hkt/bem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hkt::bem {

namespace {

using detail::kPi;


constexpr double kPhiEps = 1e-6;

double residual_at(const SectionContext& c, const SectionVars<double>& sv, double phi) {
  return phi_state(c, sv, phi).residual;
}

// Brent's method: bisection safeguarded by inverse quadratic / secant steps.
double brent(const SectionContext& c, const SectionVars<double>& sv, double a, double b,
             double fa, double fb) {
  double d = b - a, e = d;
  double cc = a, fc = fa;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      cc = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = cc;
      cc = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5e-15;
    const double xm = 0.5 * (cc - b);
    // polish to machine width: a residual-based early exit would leave an
    // input-dependent root wobble that shows up in finite differences
    if (fb == 0.0 || std::abs(xm) <= tol1) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == cc) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = residual_at(c, sv, b);
  }
  return b;
}

bool try_bracket(const SectionContext& c, const SectionVars<double>& sv, double lo,
                 double hi, double& root) {
  const double flo = residual_at(c, sv, lo);
  const double fhi = residual_at(c, sv, hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) return false;
  if (flo == 0.0) {
    root = lo;
    return true;
  }
  if (fhi == 0.0) {
    root = hi;
    return true;
  }
  if ((flo > 0.0) == (fhi > 0.0)) return false;
  root = brent(c, sv, lo, hi, flo, fhi);
  return true;
}

}  // namespace

double solve_phi(const SectionContext& c, const SectionVars<double>& sv) {
  double root = 0.0;
  // primary bracket: momentum region
  if (try_bracket(c, sv, kPhiEps, 0.5 * kPi, root)) return root;
  // interior scan in case the endpoints miss a sign change
  {
    const int n = 32;
    double prev = kPhiEps, fprev = residual_at(c, sv, prev);
    for (int i = 1; i <= n; ++i) {
      const double phi = kPhiEps + (0.5 * kPi - kPhiEps) * i / n;
      const double f = residual_at(c, sv, phi);
      if (std::isfinite(fprev) && std::isfinite(f) && (fprev > 0.0) != (f > 0.0)) {
        root = brent(c, sv, prev, phi, fprev, f);
        return root;
      }
      prev = phi;
      fprev = f;
    }
  }
  // propeller-brake region, then the high-inflow back bracket
  if (try_bracket(c, sv, -0.25 * kPi, -kPhiEps, root)) return root;
  if (try_bracket(c, sv, 0.5 * kPi + kPhiEps, kPi - kPhiEps, root)) return root;

  std::ostringstream msg;
  msg << "BEM bracketing failed: r=" << c.r << " chord=" << sv.chord
      << " twist=" << sv.twist_deg << " v=" << sv.v << " omega=" << sv.omega;
  throw SolverError(msg.str());
}

namespace {

template <class T>
bool is_parked(const SectionContext& c, const SectionVars<T>& sv) {
  return ad::value(sv.omega) * c.r < detail::kLambdaRMin * ad::value(sv.v);
}

template <class T>
SectionState<T> zero_chord_state(const SectionVars<T>& sv, const SectionContext& c) {
  using std::atan2;
  SectionState<T> out;
  out.a = T(0.0);
  out.a_t = T(0.0);
  out.phi = T(std::atan2(ad::value(sv.v), ad::value(sv.omega) * c.r));
  out.dT = T(0.0);
  out.dQ = T(0.0);
  return out;
}

}  // namespace

SectionState<double> section_loads(const SectionContext& c, const SectionVars<double>& sv,
                                   double* phi_cache) {
  if (phi_cache) *phi_cache = std::numeric_limits<double>::quiet_NaN();
  if (!(sv.chord > 0.0)) return zero_chord_state(sv, c);
  if (is_parked(c, sv)) {
    // parked rotor: purely axial inflow, phi = pi/2, no wake swirl
    const double phi = 0.5 * kPi;
    auto st = phi_state(c, sv, phi);
    st.a_t = 0.0;
    return loads_at_phi(c, sv, phi, st);
  }
  const double phi = solve_phi(c, sv);
  if (phi_cache) *phi_cache = phi;
  const auto st = phi_state(c, sv, phi);
  return loads_at_phi(c, sv, phi, st);
}

SectionState<ad::Dual> section_loads(const SectionContext& c,
                                     const SectionVars<ad::Dual>& sv, double* phi_cache) {
  using ad::Dual;
  if (!(ad::value(sv.chord) > 0.0)) return zero_chord_state(sv, c);
  if (is_parked(c, sv)) {
    const Dual phi(0.5 * kPi, 0.0);
    auto st = phi_state(c, sv, phi);
    st.a_t = Dual(0.0, 0.0);
    return loads_at_phi(c, sv, phi, st);
  }
  SectionVars<double> primal{ad::value(sv.chord), ad::value(sv.twist_deg),
                             ad::value(sv.v), ad::value(sv.omega)};
  double phi_star;
  if (phi_cache && std::isfinite(*phi_cache)) {
    phi_star = *phi_cache;
  } else {
    phi_star = solve_phi(c, primal);
    if (phi_cache) *phi_cache = phi_star;
  }
  // implicit differentiation of R(phi, p) = 0 at the converged angle:
  // dphi = -(dR/dp . dp) / (dR/dphi)
  SectionVars<Dual> frozen{Dual(primal.chord), Dual(primal.twist_deg), Dual(primal.v),
                           Dual(primal.omega)};
  const double dr_dphi = phi_state(c, frozen, Dual(phi_star, 1.0)).residual.d;
  const double dr_dp = phi_state(c, sv, Dual(phi_star, 0.0)).residual.d;
  const double phi_dot = std::abs(dr_dphi) > 1e-300 ? -dr_dp / dr_dphi : 0.0;
  const Dual phi(phi_star, phi_dot);
  const auto st = phi_state(c, sv, phi);
  return loads_at_phi(c, sv, phi, st);
}

SectionContext make_context(const rotor::BladeSection& section, const rotor::RotorSpec& spec) {
  SectionContext c;
  c.r = section.r_mid;
  c.dr = section.dr;
  c.hub_radius = spec.geometry.hub_radius;
  c.tip_radius = spec.geometry.tip_radius;
  c.num_blades = spec.num_blades;
  c.rho = spec.fluid_density;
  c.polar = &spec.polar_for(section);
  return c;
}

SectionLoads solve_section(const rotor::BladeSection& section, const rotor::RotorSpec& spec,
                           double v, double omega) {
  const auto c = make_context(section, spec);
  const SectionVars<double> sv{section.chord, section.twist_deg, v, omega};
  const auto st = section_loads(c, sv);
  return {st.a, st.a_t, st.phi, st.dT, st.dQ};
}

double section_residual(const rotor::BladeSection& section, const rotor::RotorSpec& spec,
                        double v, double omega, double phi) {
  const auto c = make_context(section, spec);
  const SectionVars<double> sv{section.chord, section.twist_deg, v, omega};
  return phi_state(c, sv, phi).residual;
}

RotorLoads rotor_torque(const rotor::RotorSpec& spec, double v, double omega) {
  RotorLoads out;
  double torque = 0.0, thrust = 0.0;
  for (const auto& section : spec.geometry.sections) {
    const auto loads = solve_section(section, spec, v, omega);
    out.sections.push_back(loads);
    torque += loads.dQ;
    thrust += loads.dT;
  }
  out.torque = spec.num_blades * torque;
  out.thrust = spec.num_blades * thrust;
  out.power = out.torque * omega;
  const double r = spec.geometry.tip_radius;
  out.cp = out.power / (0.5 * spec.fluid_density * kPi * r * r * v * v * v);
  return out;
}

std::vector<CpPoint> cp_curve(const rotor::RotorSpec& spec, std::span<const double> lambdas,
                              double v_ref) {
  std::vector<CpPoint> out;
  out.reserve(lambdas.size());
  const double r = spec.geometry.tip_radius;
  for (double lam : lambdas) {
    CpPoint p;
    p.lambda = lam;
    try {
      if (!(lam > 0.0)) throw DomainError("tip speed ratio must be positive");
      if (lam == 0.0) {
        p.cp = 0.0;
      } else {
        p.cp = rotor_torque(spec, v_ref, lam * v_ref / r).cp;
      }
    } catch (const Error& e) {
      p.ok = false;
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

CpOptimum max_cp(const rotor::RotorSpec& spec, double lambda_init) {
  if (!(lambda_init > 0.0)) throw DomainError("max_cp: lambda_init must be positive");
  constexpr double kLo = 1.0, kHi = 15.0, kStep = 0.25;
  const double r = spec.geometry.tip_radius;
  const double v_ref = 1.4;
  auto cp_at = [&](double lam) { return rotor_torque(spec, v_ref, lam * v_ref / r).cp; };

  // uphill walk from the initial guess until a bracketing triple appears
  double x1 = std::clamp(lambda_init, kLo + kStep, kHi - kStep);
  double f1 = cp_at(x1);
  double dir = cp_at(x1 + kStep) > f1 ? kStep : -kStep;
  double x0 = x1 - dir, f0 = cp_at(x0);
  double x2 = x1 + dir, f2 = cp_at(x2);
  while (f2 > f1) {
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x1 + dir;
    if (x2 < kLo - 1e-12 || x2 > kHi + 1e-12)
      throw SolverError("max_cp: no interior bracket in lambda within [1, 15]");
    f2 = cp_at(x2);
  }
  double lo = std::min(x0, x2), hi = std::max(x0, x2);
  (void)f0;

  // golden-section refinement
  constexpr double kGolden = 0.3819660112501051;
  double a = lo, b = hi;
  double xl = a + kGolden * (b - a), xr = b - kGolden * (b - a);
  double fl = cp_at(xl), fr = cp_at(xr);
  while (b - a > 0.01) {
    if (fl < fr) {
      a = xl;
      xl = xr;
      fl = fr;
      xr = b - kGolden * (b - a);
      fr = cp_at(xr);
    } else {
      b = xr;
      xr = xl;
      fr = fl;
      xl = a + kGolden * (b - a);
      fl = cp_at(xl);
    }
  }
  const double lam = 0.5 * (a + b);
  return {cp_at(lam), lam};
}

}  // namespace hkt::bem
