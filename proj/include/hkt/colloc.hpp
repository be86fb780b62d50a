#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "hkt/dynamics.hpp"
#include "hkt/nlp.hpp"
#include "hkt/rotor_model.hpp"

namespace hkt::colloc {

struct OcpConfig {
  double horizon = 150.0;
  int num_segments = 30;
  double u_max = std::numeric_limits<double>::infinity();  // unbounded by default
  double omega_lb = 0.0;

  enum class Omega0Mode { free_start, fixed_start };
  Omega0Mode omega0_mode = Omega0Mode::free_start;
  double omega0_value = 0.0;

  bool bounded() const { return std::isfinite(u_max); }
  void validate() const;
};

struct Scales {
  double omega = 1.0;
  double u = 1.0;
  double objective = 1.0;
  double defect = 1.0;
  std::vector<double> geom;
};

// Variable vector: [omega at the 2N+1 nodes][u at the 2N+1 nodes][geometry].
// Node j sits at time j*h/2: even j are segment endpoints, odd j midpoints.
// Equality rows: [N Simpson defects][N Hermite midpoint-consistency rows].
struct Layout {
  int num_segments = 0;
  int n_geom = 0;

  int n_nodes() const { return 2 * num_segments + 1; }
  int omega_offset() const { return 0; }
  int u_offset() const { return n_nodes(); }
  int geom_offset() const { return 2 * n_nodes(); }
  int dim() const { return 2 * n_nodes() + n_geom; }
  int num_defects() const { return num_segments; }
  int num_eq() const { return 2 * num_segments; }
};

struct TranscribedNlp {
  Layout layout;
  OcpConfig cfg;
  Scales scales;
  std::vector<double> node_times;
  nlp::NlpProblem problem;

  // physical arrays <-> scaled variable vector; pack then unpack is identity
  std::vector<double> pack(std::span<const double> omega, std::span<const double> u,
                           std::span<const double> geom) const;
  void unpack(std::span<const double> x, std::vector<double>& omega,
              std::vector<double>& u, std::vector<double>& geom) const;
};

namespace detail {

inline std::span<double> cache_span(std::vector<double>& cache, int slots, int j) {
  if (slots == 0) return {};
  return {cache.data() + static_cast<size_t>(j) * slots, static_cast<size_t>(slots)};
}

// Generic third-order Gauss-Lobatto (Hermite-Simpson) transcription over a
// Model providing the dynamics xdot and the objective integrand at a node:
//
//   int n_geom() const;
//   void geom_bounds(std::span<double> lb, std::span<double> ub) const;
//   Scales scales(const OcpConfig&) const;
//   int cache_slots() const;
//   template <class T>
//   void node(int j, double t, const T& omega, const T& u,
//             std::span<const T> geom, T& xdot, T& integrand,
//             std::span<double> cache) const;
template <class Model>
struct Transcriber {
  std::shared_ptr<const Model> model;
  Layout layout;
  OcpConfig cfg;
  Scales scales;
  std::vector<double> times;

  void unscale(std::span<const double> x, std::vector<double>& om, std::vector<double>& uu,
               std::vector<double>& gg) const {
    const int nn = layout.n_nodes();
    om.resize(nn);
    uu.resize(nn);
    gg.resize(layout.n_geom);
    for (int j = 0; j < nn; ++j) {
      om[j] = x[layout.omega_offset() + j] * scales.omega;
      uu[j] = x[layout.u_offset() + j] * scales.u;
    }
    for (int g = 0; g < layout.n_geom; ++g)
      gg[g] = x[layout.geom_offset() + g] * scales.geom[g];
  }

  double eval(std::span<const double> x, std::span<double> c) const {
    const int nn = layout.n_nodes();
    const int nseg = layout.num_segments;
    std::vector<double> om, uu, gg;
    unscale(x, om, uu, gg);
    std::vector<double> f(nn), p(nn);
    for (int j = 0; j < nn; ++j)
      model->node(j, times[j], om[j], uu[j], std::span<const double>(gg), f[j], p[j],
                  std::span<double>{});
    double obj = 0.0;
    for (int k = 0; k < nseg; ++k) {
      const int j0 = 2 * k, jm = 2 * k + 1, j1 = 2 * k + 2;
      const double h = times[j1] - times[j0];
      obj += (h / 6.0) * (p[j0] + 4.0 * p[jm] + p[j1]);
      c[k] = (om[j1] - om[j0] - (h / 6.0) * (f[j0] + 4.0 * f[jm] + f[j1])) / scales.defect;
      c[nseg + k] = (om[jm] - 0.5 * (om[j0] + om[j1]) - (h / 8.0) * (f[j0] - f[j1])) /
                    scales.defect;
    }
    return obj / scales.objective;
  }

  void eval_grad(std::span<const double> x, double& fval, std::span<double> grad,
                 std::span<double> c, std::span<double> jac) const {
    const int nn = layout.n_nodes();
    const int nseg = layout.num_segments;
    const int dim = layout.dim();
    const int slots = model->cache_slots();
    std::vector<double> om, uu, gg;
    unscale(x, om, uu, gg);

    std::vector<double> cache(static_cast<size_t>(slots) * nn,
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<double> f(nn), p(nn);
    for (int j = 0; j < nn; ++j)
      model->node(j, times[j], om[j], uu[j], std::span<const double>(gg), f[j], p[j],
                  cache_span(cache, slots, j));

    double obj = 0.0;
    for (int k = 0; k < nseg; ++k) {
      const int j0 = 2 * k, jm = 2 * k + 1, j1 = 2 * k + 2;
      const double h = times[j1] - times[j0];
      obj += (h / 6.0) * (p[j0] + 4.0 * p[jm] + p[j1]);
      c[k] = (om[j1] - om[j0] - (h / 6.0) * (f[j0] + 4.0 * f[jm] + f[j1])) / scales.defect;
      c[nseg + k] = (om[jm] - 0.5 * (om[j0] + om[j1]) - (h / 8.0) * (f[j0] - f[j1])) /
                    scales.defect;
    }
    fval = obj / scales.objective;

    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(jac.begin(), jac.end(), 0.0);

    const std::vector<ad::Dual> geom_frozen(gg.begin(), gg.end());

    // One node-local dual pass per variable; fd/pd are the directional
    // derivatives of (xdot, integrand) at node j for the seeded variable.
    // omega_seed carries d(omega_j)/d(x_i) in physical units (0 for u and
    // geometry seeds); the linear omega terms of the rows are added here.
    auto add_node_terms = [&](int var, int j, double omega_seed, double fd, double pd) {
      // segments containing node j
      const int first_seg = (j % 2 == 1) ? (j - 1) / 2 : j / 2 - 1;
      const int last_seg = (j % 2 == 1) ? (j - 1) / 2 : j / 2;
      for (int k = std::max(first_seg, 0); k <= std::min(last_seg, nseg - 1); ++k) {
        const int j0 = 2 * k, jm = 2 * k + 1, j1 = 2 * k + 2;
        const double h = times[j1] - times[j0];
        const double w = (j == jm) ? 4.0 : 1.0;
        grad[var] += (h / 6.0) * w * pd / scales.objective;
        double dsimpson = -(h / 6.0) * w * fd;
        if (j == j1) dsimpson += omega_seed;
        if (j == j0) dsimpson -= omega_seed;
        jac[static_cast<size_t>(k) * dim + var] += dsimpson / scales.defect;
        double dhermite = 0.0;
        if (j == jm) dhermite += omega_seed;
        if (j == j0) dhermite += -0.5 * omega_seed - (h / 8.0) * fd;
        if (j == j1) dhermite += -0.5 * omega_seed + (h / 8.0) * fd;
        jac[static_cast<size_t>(nseg + k) * dim + var] += dhermite / scales.defect;
      }
    };

    ad::Dual fd_d, pd_d;
    for (int j = 0; j < nn; ++j) {
      // omega_j
      model->node(j, times[j], ad::Dual(om[j], scales.omega), ad::Dual(uu[j]),
                  std::span<const ad::Dual>(geom_frozen), fd_d, pd_d,
                  cache_span(cache, slots, j));
      add_node_terms(layout.omega_offset() + j, j, scales.omega, fd_d.d, pd_d.d);
      // u_j
      model->node(j, times[j], ad::Dual(om[j]), ad::Dual(uu[j], scales.u),
                  std::span<const ad::Dual>(geom_frozen), fd_d, pd_d,
                  cache_span(cache, slots, j));
      add_node_terms(layout.u_offset() + j, j, 0.0, fd_d.d, pd_d.d);
    }

    if (layout.n_geom > 0) {
      std::vector<ad::Dual> geom_seeded(gg.begin(), gg.end());
      for (int g = 0; g < layout.n_geom; ++g) {
        geom_seeded[g].d = scales.geom[g];
        for (int j = 0; j < nn; ++j) {
          model->node(j, times[j], ad::Dual(om[j]), ad::Dual(uu[j]),
                      std::span<const ad::Dual>(geom_seeded), fd_d, pd_d,
                      cache_span(cache, slots, j));
          add_node_terms(layout.geom_offset() + g, j, 0.0, fd_d.d, pd_d.d);
        }
        geom_seeded[g].d = 0.0;
      }
    }
  }
};

}  // namespace detail

// Transcribes a generic model. Production code uses the rotor overload
// below; tests instantiate this directly with polynomial dynamics.
template <class Model>
TranscribedNlp transcribe_model(std::shared_ptr<const Model> model, const OcpConfig& cfg) {
  cfg.validate();
  TranscribedNlp out;
  out.cfg = cfg;
  out.layout.num_segments = cfg.num_segments;
  out.layout.n_geom = model->n_geom();
  out.scales = model->scales(cfg);
  if (static_cast<int>(out.scales.geom.size()) != out.layout.n_geom)
    throw ConfigError("transcribe: geometry scale vector size mismatch");

  const int nn = out.layout.n_nodes();
  out.node_times.resize(nn);
  const double half_h = cfg.horizon / (2.0 * cfg.num_segments);
  for (int j = 0; j < nn; ++j) out.node_times[j] = half_h * j;

  auto tr = std::make_shared<detail::Transcriber<Model>>();
  tr->model = model;
  tr->layout = out.layout;
  tr->cfg = cfg;
  tr->scales = out.scales;
  tr->times = out.node_times;

  nlp::NlpProblem& p = out.problem;
  p.dim = out.layout.dim();
  p.num_eq = out.layout.num_eq();
  p.name = "ocp";
  p.lb.assign(p.dim, -std::numeric_limits<double>::infinity());
  p.ub.assign(p.dim, std::numeric_limits<double>::infinity());
  for (int j = 0; j < nn; ++j) {
    p.lb[out.layout.omega_offset() + j] = cfg.omega_lb / out.scales.omega;
    p.lb[out.layout.u_offset() + j] = 0.0;
    if (cfg.bounded()) p.ub[out.layout.u_offset() + j] = cfg.u_max / out.scales.u;
  }
  if (cfg.omega0_mode == OcpConfig::Omega0Mode::fixed_start) {
    p.lb[out.layout.omega_offset()] = cfg.omega0_value / out.scales.omega;
    p.ub[out.layout.omega_offset()] = cfg.omega0_value / out.scales.omega;
  }
  if (out.layout.n_geom > 0) {
    std::vector<double> glb(out.layout.n_geom), gub(out.layout.n_geom);
    model->geom_bounds(glb, gub);
    for (int g = 0; g < out.layout.n_geom; ++g) {
      p.lb[out.layout.geom_offset() + g] = glb[g] / out.scales.geom[g];
      p.ub[out.layout.geom_offset() + g] = gub[g] / out.scales.geom[g];
    }
  }

  p.eval = [tr](std::span<const double> x, std::span<double> c) { return tr->eval(x, c); };
  p.eval_grad = [tr](std::span<const double> x, double& f, std::span<double> grad,
                     std::span<double> c, std::span<double> jac) {
    tr->eval_grad(x, f, grad, c, jac);
  };
  return out;
}

// Rotor OCP: maximize the Simpson quadrature of P = Q*omega subject to the
// rotor-speed dynamics, control bounds, omega >= 0 at every node, and (when
// include_geometry is set) the free chords/twists as extra variables with
// their design bounds. Geometry variables override the free sections of
// base_spec.
TranscribedNlp transcribe(const rotor::RotorSpec& base_spec, const dyn::FlowProfile& profile,
                          const OcpConfig& cfg, bool include_geometry);

// Trajectory sampled at all nodes with Q and P recomputed from the BEM model
// (using the solution geometry when present); bound violations noted in
// Trajectory::notes. Throws on layout/solution length mismatch.
dyn::Trajectory extract_trajectory(const TranscribedNlp& nlp, std::span<const double> x,
                                   const dyn::FlowProfile& profile,
                                   const rotor::RotorSpec& base_spec);

// Geometry encoded in a solution vector applied to the base spec's geometry.
rotor::BladeGeometry geometry_from_solution(const TranscribedNlp& nlp,
                                            std::span<const double> x,
                                            const rotor::RotorSpec& base_spec);

// Warm start: omega tracks lambda_seed, u carries the fluid torque along
// that trajectory (clipped into bounds), geometry block at the base values.
std::vector<double> mppt_initial_guess(const TranscribedNlp& nlp,
                                       const rotor::RotorSpec& spec,
                                       const dyn::FlowProfile& profile, double lambda_seed);

// Piecewise-quadratic control reconstruction on the node triples of each
// segment (the collocation control representation).
std::function<double(double)> control_interpolant(const dyn::Trajectory& traj);

}  // namespace hkt::colloc
