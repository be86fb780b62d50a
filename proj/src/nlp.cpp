#include "hkt/nlp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <thread>
#include <vector>

namespace hkt::nlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void project(std::span<double> x, std::span<const double> lb, std::span<const double> ub) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lb[i], ub[i]);
}

// Everything eval_grad produces at one point.
struct Workspace {
  double f = 0.0;
  std::vector<double> c, gf, jac;
  void resize(int dim, int num_eq) {
    c.resize(num_eq);
    gf.resize(dim);
    jac.resize(static_cast<size_t>(num_eq) * dim);
  }
};

// Augmented Lagrangian of the minimization form: M = -f + lambda'c + mu/2 c'c.
struct Merit {
  const NlpProblem* p = nullptr;
  std::vector<double> lambda;
  double mu = 10.0;

  double combine(double f, std::span<const double> c) const {
    double m = -f;
    for (size_t i = 0; i < c.size(); ++i)
      m += lambda[i] * c[i] + 0.5 * mu * c[i] * c[i];
    return m;
  }

  double value(std::span<const double> x, std::vector<double>& cbuf) const {
    const double f = p->eval(x, cbuf);
    return combine(f, cbuf);
  }

  // Fills ws and the merit gradient; returns the merit value.
  double value_grad(std::span<const double> x, std::span<double> gm, Workspace& ws) const {
    p->eval_grad(x, ws.f, ws.gf, ws.c, ws.jac);
    const int n = p->dim, m = p->num_eq;
    for (int i = 0; i < n; ++i) gm[i] = -ws.gf[i];
    for (int k = 0; k < m; ++k) {
      const double w = lambda[k] + mu * ws.c[k];
      const double* row = ws.jac.data() + static_cast<size_t>(k) * n;
      for (int i = 0; i < n; ++i) gm[i] += w * row[i];
    }
    return combine(ws.f, ws.c);
  }
};

struct InnerResult {
  int iterations = 0;
  double pg = kInf;
  bool eval_failed = false;
};

double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                               std::span<const double> lb, std::span<const double> ub) {
  double m = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double step = std::clamp(x[i] - g[i], lb[i], ub[i]) - x[i];
    m = std::max(m, std::abs(step));
  }
  return m;
}

// Projected L-BFGS: two-loop recursion restricted to the free set, weak-Wolfe
// line search along the projected path. Evaluator exceptions inside the line
// search read as +inf merit and force a backtrack.
InnerResult lbfgs_box(const Merit& merit, std::vector<double>& x,
                      std::span<const double> lb, std::span<const double> ub, double tol,
                      int max_iter, int memory, Workspace& ws, std::ostream* log) {
  const int n = static_cast<int>(x.size());
  InnerResult res;

  std::vector<double> g(n), xn(n), gn(n), cbuf(merit.lambda.size());
  std::deque<std::array<std::vector<double>, 2>> pairs;  // {s, y}
  std::deque<double> rho;

  double m_val;
  try {
    m_val = merit.value_grad(x, g, ws);
  } catch (const Error&) {
    res.eval_failed = true;
    return res;
  }
  int recoveries_left = 40;

  // zero the components that a step cannot move out of an active bound;
  // activity is decided by the gradient, the masked vector may differ
  auto mask_active = [&](std::vector<double>& v) {
    for (int i = 0; i < n; ++i) {
      const bool at_lb = x[i] <= lb[i] && g[i] > 0.0;
      const bool at_ub = x[i] >= ub[i] && g[i] < 0.0;
      if (at_lb || at_ub) v[i] = 0.0;
    }
  };

  std::vector<double> d(n), q(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    res.pg = projected_gradient_norm(x, g, lb, ub);
    if (log) {
      char line[160];
      std::snprintf(line, sizeof line, "%d, %.9e, -, %.3e, -", res.iterations, ws.f,
                    res.pg);
      *log << line << "\n";
    }
    if (res.pg <= tol) return res;

    // search direction on the free set
    q = g;
    mask_active(q);
    std::vector<double> alpha(pairs.size());
    for (int k = static_cast<int>(pairs.size()) - 1; k >= 0; --k) {
      const auto& s = pairs[k][0];
      const auto& y = pairs[k][1];
      double sq = 0.0;
      for (int i = 0; i < n; ++i) sq += s[i] * q[i];
      alpha[k] = rho[k] * sq;
      for (int i = 0; i < n; ++i) q[i] -= alpha[k] * y[i];
    }
    double gamma = 1.0;
    if (!pairs.empty()) {
      const auto& s = pairs.back()[0];
      const auto& y = pairs.back()[1];
      double sy = 0.0, yy = 0.0;
      for (int i = 0; i < n; ++i) {
        sy += s[i] * y[i];
        yy += y[i] * y[i];
      }
      if (yy > 0.0) gamma = sy / yy;
    }
    for (int i = 0; i < n; ++i) q[i] *= gamma;
    for (size_t k = 0; k < pairs.size(); ++k) {
      const auto& s = pairs[k][0];
      const auto& y = pairs[k][1];
      double yq = 0.0;
      for (int i = 0; i < n; ++i) yq += y[i] * q[i];
      const double beta = rho[k] * yq;
      for (int i = 0; i < n; ++i) q[i] += s[i] * (alpha[k] - beta);
    }
    for (int i = 0; i < n; ++i) d[i] = -q[i];
    mask_active(d);  // freeze active components of the direction too

    double dg = 0.0;
    for (int i = 0; i < n; ++i) dg += d[i] * g[i];
    if (!(dg < 0.0)) {
      pairs.clear();
      rho.clear();
      q = g;
      mask_active(q);
      for (int i = 0; i < n; ++i) d[i] = -q[i];
      dg = 0.0;
      for (int i = 0; i < n; ++i) dg += d[i] * g[i];
      if (!(dg < 0.0)) return res;  // projected gradient is numerically zero
    }

    // Weak-Wolfe line search on the projected path: Armijo bisection on
    // failure, expansion when the curvature condition fails (keeps s'y > 0
    // so the memory stays well conditioned); falls back to the best
    // Armijo-accepted point when curvature is unattainable, e.g. across a
    // derivative-discontinuity face of a piecewise-linear table.
    bool accepted = false;
    bool have_new_grad = false;
    double m_new = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        // steepest-descent retry with fresh memory
        pairs.clear();
        rho.clear();
        q = g;
        mask_active(q);
        for (int i = 0; i < n; ++i) d[i] = -q[i];
        dg = 0.0;
        for (int i = 0; i < n; ++i) dg += d[i] * g[i];
        if (!(dg < 0.0)) break;
      }
      double lo = 0.0, hi = kInf, t = 1.0;
      bool have_best = false;
      double best_m = 0.0;
      std::vector<double> best_x, best_g;
      for (int evals = 0; evals < 60; ++evals) {
        for (int i = 0; i < n; ++i) xn[i] = x[i] + t * d[i];
        project(xn, lb, ub);
        double gstep = 0.0;
        bool clipped = false;
        for (int i = 0; i < n; ++i) {
          gstep += g[i] * (xn[i] - x[i]);
          if (xn[i] != x[i] + t * d[i]) clipped = true;
        }
        if (gstep >= 0.0) {
          hi = t;
          t = 0.5 * (lo + hi);
          continue;
        }
        double mt;
        try {
          mt = merit.value(xn, cbuf);
        } catch (const Error&) {
          mt = kInf;
        }
        if (!(std::isfinite(mt) && mt <= m_val + 1e-4 * gstep)) {
          hi = t;
          t = 0.5 * (lo + hi);
          continue;
        }
        if (!clipped) {
          try {
            mt = merit.value_grad(xn, gn, ws);
          } catch (const Error&) {
            break;
          }
          double dphi = 0.0;
          for (int i = 0; i < n; ++i) dphi += gn[i] * d[i];
          if (dphi < 0.9 * dg && evals < 20) {
            if (!have_best || mt < best_m) {
              best_m = mt;
              best_x = xn;
              best_g = gn;
              have_best = true;
            }
            lo = t;
            t = std::isinf(hi) ? 2.0 * t : 0.5 * (lo + hi);
            continue;
          }
          m_new = mt;
          have_new_grad = true;
          accepted = true;
          break;
        }
        m_new = mt;
        have_new_grad = false;
        accepted = true;
        break;
      }
      if (!accepted && have_best) {
        xn = best_x;
        gn = best_g;
        m_new = best_m;
        have_new_grad = true;
        accepted = true;
      }
    }

    if (!accepted) {
      // Coordinate probe with shrinking deterministic steps: progress along
      // a kink face where gradient stepping has wedged.
      if (recoveries_left > 0) {
        --recoveries_left;
        bool improved = false;
        for (double step : {1e-3, 1e-5, std::max(tol, 1e-7)}) {
          for (int i = 0; i < n; ++i) {
            for (double sgn : {1.0, -1.0}) {
              xn = x;
              xn[i] = std::clamp(x[i] + sgn * step, lb[i], ub[i]);
              if (xn[i] == x[i]) continue;
              double mt;
              try {
                mt = merit.value(xn, cbuf);
              } catch (const Error&) {
                continue;
              }
              if (mt < m_val - 1e-14 * (1.0 + std::abs(m_val))) {
                x = xn;
                m_val = mt;
                improved = true;
              }
            }
          }
        }
        if (improved) {
          pairs.clear();
          rho.clear();
          try {
            m_val = merit.value_grad(x, g, ws);
          } catch (const Error&) {
            return res;
          }
          ++res.iterations;
          continue;
        }
      }
      return res;  // stalled; caller decides what to do
    }

    if (!have_new_grad) {
      try {
        m_new = merit.value_grad(xn, gn, ws);
      } catch (const Error&) {
        return res;
      }
    }
    ++res.iterations;
    if (log) {
      char line[160];
      std::snprintf(line, sizeof line, "%d, %.9e, %.3e, %.3e, -", res.iterations, ws.f,
                    inf_norm(ws.c), res.pg);
      *log << line << "\n";
    }

    // curvature update
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = xn[i] - x[i];
      const double y = gn[i] - g[i];
      sy += s * y;
      ss += s * s;
      yy += y * y;
    }
    if (sy > 1e-10 * std::sqrt(ss * yy)) {
      std::array<std::vector<double>, 2> pair;
      pair[0].resize(n);
      pair[1].resize(n);
      for (int i = 0; i < n; ++i) {
        pair[0][i] = xn[i] - x[i];
        pair[1][i] = gn[i] - g[i];
      }
      pairs.push_back(std::move(pair));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(pairs.size()) > memory) {
        pairs.pop_front();
        rho.pop_front();
      }
    }
    x = xn;
    g = gn;
    m_val = m_new;
  }
  res.pg = projected_gradient_norm(x, g, lb, ub);
  return res;
}

}  // namespace

NlpSolution solve(const NlpProblem& problem, std::span<const double> x0,
                  const SolveOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = problem.dim;
  const int m = problem.num_eq;

  NlpSolution sol;
  sol.x.assign(x0.begin(), x0.end());
  project(sol.x, problem.lb, problem.ub);

  Merit merit;
  merit.p = &problem;
  merit.lambda.assign(m, 0.0);
  merit.mu = options.initial_penalty;

  Workspace ws;
  ws.resize(n, m);

  double inner_tol = std::max(options.opt_tol, 1e-2);
  double eta = std::max(options.feas_tol, 1e-2);
  int total_inner = 0;
  bool kkt = false;
  bool eval_failed = false;
  double feas = kInf, pg = kInf;
  int stall_count = 0;

  for (int outer = 0; outer < options.max_outer; ++outer) {
    if (m == 0) inner_tol = options.opt_tol;
    const int budget =
        std::min(options.max_inner_per_outer, options.max_total_inner - total_inner);
    if (budget <= 0) break;
    const auto res =
        lbfgs_box(merit, sol.x, problem.lb, problem.ub, inner_tol, budget,
                  options.lbfgs_memory, ws, options.log);
    total_inner += res.iterations;
    if (res.eval_failed) {
      eval_failed = true;
      break;
    }
    feas = inf_norm(ws.c);
    pg = res.pg;  // equals the projected Lagrangian gradient at lambda + mu c
    if (feas <= options.feas_tol && pg <= options.opt_tol) {
      kkt = true;
      break;
    }
    if (m == 0) break;  // pure bound-constrained: one inner solve decides

    // a stalled inner solve is only terminal once the penalty cannot grow
    stall_count = res.iterations == 0 ? stall_count + 1 : 0;
    if (stall_count >= 8 || (stall_count >= 3 && merit.mu >= options.penalty_cap)) break;

    if (feas <= options.feas_tol && res.iterations == 0) {
      // feasible but wedged on the optimality side: tighten multipliers and
      // grow the penalty so the merit surface changes shape
      for (int k = 0; k < m; ++k) merit.lambda[k] += merit.mu * ws.c[k];
      merit.mu = std::min(merit.mu * options.penalty_growth, options.penalty_cap);
      inner_tol = std::max(options.opt_tol, 0.2 * inner_tol);
    } else if (feas <= std::max(eta, options.feas_tol)) {
      for (int k = 0; k < m; ++k) merit.lambda[k] += merit.mu * ws.c[k];
      eta = std::max(options.feas_tol, 0.2 * eta);
      inner_tol = std::max(options.opt_tol, 0.2 * inner_tol);
    } else {
      merit.mu = std::min(merit.mu * options.penalty_growth, options.penalty_cap);
    }
  }

  sol.objective = ws.f;
  sol.feasibility = feas;
  sol.optimality = pg;
  sol.iterations = total_inner;
  sol.status = kkt ? NlpSolution::Status::converged
             : eval_failed ? NlpSolution::Status::failure
                           : NlpSolution::Status::iteration_limit;
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return sol;
}

std::vector<double> gradient(const NlpProblem& problem, std::span<const double> x) {
  Workspace ws;
  ws.resize(problem.dim, problem.num_eq);
  std::vector<double> g(problem.dim);
  double f = 0.0;
  problem.eval_grad(x, f, g, ws.c, ws.jac);
  return g;
}

std::vector<NlpSolution> multi_start(const NlpProblem& problem,
                                     const std::vector<std::vector<double>>& starts,
                                     const SolveOptions& options, int jobs) {
  if (starts.empty()) throw ConfigError("multi_start: need at least one start");
  std::vector<NlpSolution> out(starts.size());
  const int n = static_cast<int>(starts.size());
  if (jobs <= 0)
    jobs = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), n));
  jobs = std::min(jobs, n);

  SolveOptions opts = options;
  if (jobs > 1) opts.log = nullptr;  // per-thread logs would interleave

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        out[i] = solve(problem, starts[i], opts);
      } catch (const Error&) {
        out[i] = NlpSolution{};
        out[i].x = starts[i];
        out[i].status = NlpSolution::Status::failure;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::vector<Cluster> cluster_solutions(const std::vector<NlpSolution>& solutions,
                                       double var_tol) {
  std::vector<Cluster> clusters;
  for (size_t i = 0; i < solutions.size(); ++i) {
    bool placed = false;
    if (solutions[i].status != NlpSolution::Status::failure) {
      for (auto& cl : clusters) {
        const auto& rep = solutions[cl.members.front()];
        if (rep.status == NlpSolution::Status::failure) continue;
        if (rep.x.size() != solutions[i].x.size()) continue;
        double dist = 0.0;
        for (size_t k = 0; k < rep.x.size(); ++k)
          dist = std::max(dist, std::abs(rep.x[k] - solutions[i].x[k]));
        if (dist < var_tol) {
          cl.members.push_back(static_cast<int>(i));
          if (solutions[i].objective > solutions[cl.best].objective)
            cl.best = static_cast<int>(i);
          placed = true;
          break;
        }
      }
    }
    if (!placed) {
      Cluster cl;
      cl.members.push_back(static_cast<int>(i));
      cl.best = static_cast<int>(i);
      clusters.push_back(std::move(cl));
    }
  }
  return clusters;
}

}  // namespace hkt::nlp
