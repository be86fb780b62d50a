#include "hkt/colloc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hkt/bem.hpp"

namespace hkt::colloc {

void OcpConfig::validate() const {
  if (!(horizon > 0.0)) throw ConfigError("ocp: horizon must be positive");
  if (num_segments < 1) throw ConfigError("ocp: need at least one segment");
  // u_max = 0 is allowed as the degenerate freewheeling case; pipelines
  // flag it in the report
  if (!(u_max >= 0.0)) throw ConfigError("ocp: u_max must be non-negative (or infinite)");
  if (omega_lb < 0.0) throw ConfigError("ocp: omega_lb must be non-negative");
  if (omega0_mode == Omega0Mode::fixed_start && omega0_value < omega_lb)
    throw ConfigError("ocp: fixed omega0 below omega_lb");
}

std::vector<double> TranscribedNlp::pack(std::span<const double> omega,
                                         std::span<const double> u,
                                         std::span<const double> geom) const {
  const int nn = layout.n_nodes();
  if (static_cast<int>(omega.size()) != nn || static_cast<int>(u.size()) != nn ||
      static_cast<int>(geom.size()) != layout.n_geom)
    throw ConfigError("pack: array sizes do not match layout");
  std::vector<double> x(layout.dim());
  for (int j = 0; j < nn; ++j) {
    x[layout.omega_offset() + j] = omega[j] / scales.omega;
    x[layout.u_offset() + j] = u[j] / scales.u;
  }
  for (int g = 0; g < layout.n_geom; ++g)
    x[layout.geom_offset() + g] = geom[g] / scales.geom[g];
  return x;
}

void TranscribedNlp::unpack(std::span<const double> x, std::vector<double>& omega,
                            std::vector<double>& u, std::vector<double>& geom) const {
  if (static_cast<int>(x.size()) != layout.dim())
    throw ConfigError("unpack: solution length " + std::to_string(x.size()) +
                      " does not match layout dimension " + std::to_string(layout.dim()));
  const int nn = layout.n_nodes();
  omega.resize(nn);
  u.resize(nn);
  geom.resize(layout.n_geom);
  for (int j = 0; j < nn; ++j) {
    omega[j] = x[layout.omega_offset() + j] * scales.omega;
    u[j] = x[layout.u_offset() + j] * scales.u;
  }
  for (int g = 0; g < layout.n_geom; ++g)
    geom[g] = x[layout.geom_offset() + g] * scales.geom[g];
}

namespace {

constexpr double kChordLb = 1e-3;  // box stand-in for the strict 0 < c bound
constexpr double kChordUb = 1.0;
constexpr double kTwistLb = 0.0;
constexpr double kTwistUb = 30.0;

// Dynamics + integrand of the rotor energy-maximization OCP.
struct RotorOcpModel {
  rotor::RotorSpec spec;  // owned; evaluator points into it
  std::unique_ptr<bem::RotorEvaluator> evaluator;
  std::vector<double> v_nodes;
  bool with_geometry = false;

  int n_geom() const { return with_geometry ? 2 * evaluator->n_free() : 0; }

  void geom_bounds(std::span<double> lb, std::span<double> ub) const {
    const int nf = evaluator->n_free();
    for (int i = 0; i < nf; ++i) {
      lb[i] = kChordLb;
      ub[i] = kChordUb;
      lb[nf + i] = kTwistLb;
      ub[nf + i] = kTwistUb;
    }
  }

  Scales scales(const OcpConfig& cfg) const {
    Scales s;
    const double rated = spec.rated_speed > 0.0 ? spec.rated_speed : 1.6;
    s.omega = 8.0 * rated / spec.geometry.tip_radius;
    s.u = cfg.bounded() && cfg.u_max > 0.0 ? cfg.u_max : 5e4;
    s.objective = s.u * s.omega * cfg.horizon;
    s.defect = s.omega;
    const int nf = evaluator->n_free();
    s.geom.assign(static_cast<size_t>(n_geom()), 1.0);
    for (int i = 0; i < nf && with_geometry; ++i) s.geom[nf + i] = 30.0;
    return s;
  }

  int cache_slots() const { return evaluator->n_sections(); }

  template <class T>
  void node(int j, double /*t*/, const T& omega, const T& u, std::span<const T> geom,
            T& xdot, T& integrand, std::span<double> cache) const {
    const double v = v_nodes[j];
    const int nf = evaluator->n_free();
    bem::RotorEvalT<T> loads;
    if (with_geometry)
      loads = evaluator->evaluate(geom.first(nf), geom.subspan(nf), T(v), omega, cache);
    else
      loads = evaluator->evaluate(std::span<const T>{}, std::span<const T>{}, T(v), omega,
                                  cache);
    xdot = (loads.torque - u) / spec.inertia;
    integrand = loads.power;
  }
};

std::shared_ptr<RotorOcpModel> make_rotor_model(const rotor::RotorSpec& base_spec,
                                                const dyn::FlowProfile& profile,
                                                const OcpConfig& cfg,
                                                bool include_geometry) {
  if (profile.duration < cfg.horizon - 1e-9)
    throw ConfigError("transcribe: flow profile duration shorter than the horizon");
  auto model = std::make_shared<RotorOcpModel>();
  model->spec = base_spec;
  model->evaluator = std::make_unique<bem::RotorEvaluator>(model->spec);
  model->with_geometry = include_geometry;
  const int nn = 2 * cfg.num_segments + 1;
  model->v_nodes.resize(nn);
  const double half_h = cfg.horizon / (2.0 * cfg.num_segments);
  for (int j = 0; j < nn; ++j)
    model->v_nodes[j] = dyn::flow_velocity(profile, half_h * j);
  return model;
}

}  // namespace

TranscribedNlp transcribe(const rotor::RotorSpec& base_spec, const dyn::FlowProfile& profile,
                          const OcpConfig& cfg, bool include_geometry) {
  auto model = make_rotor_model(base_spec, profile, cfg, include_geometry);
  return transcribe_model<RotorOcpModel>(model, cfg);
}

rotor::BladeGeometry geometry_from_solution(const TranscribedNlp& nlp,
                                            std::span<const double> x,
                                            const rotor::RotorSpec& base_spec) {
  std::vector<double> om, uu, gg;
  nlp.unpack(x, om, uu, gg);
  rotor::BladeGeometry geo = base_spec.geometry;
  if (nlp.layout.n_geom == 0) return geo;
  const auto free = geo.free_section_indices();
  const int nf = static_cast<int>(free.size());
  if (nlp.layout.n_geom != 2 * nf)
    throw ConfigError("geometry_from_solution: geometry block size mismatch");
  for (int i = 0; i < nf; ++i) {
    geo.sections[free[i]].chord = gg[i];
    geo.sections[free[i]].twist_deg = gg[nf + i];
  }
  return geo;
}

dyn::Trajectory extract_trajectory(const TranscribedNlp& nlp, std::span<const double> x,
                                   const dyn::FlowProfile& profile,
                                   const rotor::RotorSpec& base_spec) {
  std::vector<double> om, uu, gg;
  nlp.unpack(x, om, uu, gg);

  const auto spec = rotor::with_geometry(base_spec, geometry_from_solution(nlp, x, base_spec));

  dyn::Trajectory traj;
  const int nn = nlp.layout.n_nodes();
  traj.times = nlp.node_times;
  traj.omega = om;
  traj.u = uu;
  traj.q.resize(nn);
  traj.power.resize(nn);
  traj.energy.resize(nn);
  double energy = 0.0;
  for (int j = 0; j < nn; ++j) {
    const double v = dyn::flow_velocity(profile, traj.times[j]);
    const auto loads = bem::rotor_torque(spec, v, std::max(om[j], 0.0));
    traj.q[j] = loads.torque;
    traj.power[j] = loads.torque * om[j];
    if (j > 0)
      energy += 0.5 * (traj.power[j - 1] + traj.power[j]) *
                (traj.times[j] - traj.times[j - 1]);
    traj.energy[j] = energy;
  }

  // diagnostics: flag bound violations without failing the extraction
  const double om_tol = 1e-9 * nlp.scales.omega;
  const double u_tol = 1e-9 * nlp.scales.u;
  for (int j = 0; j < nn; ++j) {
    if (om[j] < nlp.cfg.omega_lb - om_tol) {
      std::ostringstream msg;
      msg << "omega bound violated at node " << j << ": " << om[j];
      traj.notes.push_back(msg.str());
    }
    if (uu[j] < -u_tol || (nlp.cfg.bounded() && uu[j] > nlp.cfg.u_max + u_tol)) {
      std::ostringstream msg;
      msg << "control bound violated at node " << j << ": " << uu[j];
      traj.notes.push_back(msg.str());
    }
  }
  return traj;
}

std::vector<double> mppt_initial_guess(const TranscribedNlp& nlp,
                                       const rotor::RotorSpec& spec,
                                       const dyn::FlowProfile& profile,
                                       double lambda_seed) {
  const int nn = nlp.layout.n_nodes();
  const double r = spec.geometry.tip_radius;
  std::vector<double> omega(nn), u(nn);
  for (int j = 0; j < nn; ++j) {
    const double v = dyn::flow_velocity(profile, nlp.node_times[j]);
    omega[j] = std::max(lambda_seed * v / r, nlp.cfg.omega_lb);
    double q = bem::rotor_torque(spec, v, omega[j]).torque;
    q = std::max(q, 0.0);
    if (nlp.cfg.bounded()) q = std::min(q, nlp.cfg.u_max);
    u[j] = q;
  }
  std::vector<double> geom(nlp.layout.n_geom);
  if (nlp.layout.n_geom > 0) {
    const auto free = spec.geometry.free_section_indices();
    const int nf = static_cast<int>(free.size());
    for (int i = 0; i < nf; ++i) {
      geom[i] = spec.geometry.sections[free[i]].chord;
      geom[nf + i] = spec.geometry.sections[free[i]].twist_deg;
    }
  }
  return nlp.pack(omega, u, geom);
}

std::function<double(double)> control_interpolant(const dyn::Trajectory& traj) {
  if (traj.times.size() < 3 || traj.times.size() % 2 == 0)
    throw ConfigError("control_interpolant: trajectory is not on a collocation grid");
  const auto times = traj.times;
  const auto u = traj.u;
  const int nseg = (static_cast<int>(times.size()) - 1) / 2;
  return [times, u, nseg](double t) {
    const double t0 = times.front(), t1 = times.back();
    const double tc = std::clamp(t, t0, t1);
    // locate segment
    int k = 0, hi = nseg - 1;
    while (k < hi) {
      const int mid = (k + hi + 1) / 2;
      if (tc >= times[2 * mid])
        k = mid;
      else
        hi = mid - 1;
    }
    const double ta = times[2 * k], tm = times[2 * k + 1], tb = times[2 * k + 2];
    const double ua = u[2 * k], um = u[2 * k + 1], ub = u[2 * k + 2];
    const double la = (tc - tm) * (tc - tb) / ((ta - tm) * (ta - tb));
    const double lm = (tc - ta) * (tc - tb) / ((tm - ta) * (tm - tb));
    const double lb = (tc - ta) * (tc - tm) / ((tb - ta) * (tb - tm));
    return ua * la + um * lm + ub * lb;
  };
}

}  // namespace hkt::colloc
