#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hkt/dual.hpp"
#include "hkt/errors.hpp"

namespace hkt::nlp {

// Bound-constrained problem with nonlinear equality constraints. The
// objective is MAXIMIZED. Evaluators must be deterministic and safe to call
// concurrently.
struct NlpProblem {
  int dim = 0;
  int num_eq = 0;
  std::vector<double> lb, ub;

  // Returns the objective and fills c (size num_eq) with equality residuals.
  std::function<double(std::span<const double>, std::span<double>)> eval;

  // Combined value / gradient / Jacobian (row-major num_eq x dim).
  std::function<void(std::span<const double>, double&, std::span<double>,
                     std::span<double>, std::span<double>)>
      eval_grad;

  std::string name;
};

// Builds both evaluators from a single functor templated on the scalar type:
//   template <class T> T operator()(std::span<const T> x, std::span<T> c) const
// The gradient/Jacobian come from one forward-mode dual pass per variable.
template <class F>
NlpProblem make_ad_problem(int dim, int num_eq, std::vector<double> lb,
                           std::vector<double> ub, F func, std::string name = {}) {
  NlpProblem p;
  p.dim = dim;
  p.num_eq = num_eq;
  p.lb = std::move(lb);
  p.ub = std::move(ub);
  p.name = std::move(name);
  p.eval = [func, num_eq](std::span<const double> x, std::span<double> c) {
    return func(x, c);
  };
  p.eval_grad = [func, dim, num_eq](std::span<const double> x, double& f,
                                    std::span<double> grad, std::span<double> c,
                                    std::span<double> jac) {
    f = func(x, c);
    std::vector<ad::Dual> xd(x.begin(), x.end());
    std::vector<ad::Dual> cd(num_eq);
    for (int i = 0; i < dim; ++i) {
      xd[i].d = 1.0;
      const ad::Dual fd = func(std::span<const ad::Dual>(xd), std::span<ad::Dual>(cd));
      grad[i] = fd.d;
      for (int k = 0; k < num_eq; ++k) jac[static_cast<size_t>(k) * dim + i] = cd[k].d;
      xd[i].d = 0.0;
    }
  };
  return p;
}

struct NlpSolution {
  enum class Status { converged, iteration_limit, failure };

  std::vector<double> x;
  double objective = 0.0;
  double feasibility = 0.0;  // max |equality residual| and bound violation
  double optimality = 0.0;   // projected Lagrangian gradient, inf norm
  int iterations = 0;        // total inner iterations
  double wall_time_s = 0.0;
  Status status = Status::failure;
};

struct SolveOptions {
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  int max_outer = 40;
  int max_inner_per_outer = 4000;
  int max_total_inner = 150000;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double penalty_cap = 1e8;
  int lbfgs_memory = 10;
  std::ostream* log = nullptr;  // line format: iter, objective, feas, opt, step
};

// Augmented-Lagrangian outer loop around a projected L-BFGS inner solver.
// x0 is projected into the bounds if needed.
NlpSolution solve(const NlpProblem& problem, std::span<const double> x0,
                  const SolveOptions& options = {});

// Gradient of the (maximized) objective at x, via the problem's AD path.
std::vector<double> gradient(const NlpProblem& problem, std::span<const double> x);

// Independent solves from each start; per-start failures are isolated.
// jobs = 0 picks a hardware-based default.
std::vector<NlpSolution> multi_start(const NlpProblem& problem,
                                     const std::vector<std::vector<double>>& starts,
                                     const SolveOptions& options = {}, int jobs = 0);

struct Cluster {
  std::vector<int> members;  // indices into the solutions vector
  int best = -1;             // member with the highest objective
};

// Groups solutions whose variable vectors agree within var_tol (inf norm,
// scaled units). Failed solves go into their own clusters.
std::vector<Cluster> cluster_solutions(const std::vector<NlpSolution>& solutions,
                                       double var_tol = 1e-3);

}  // namespace hkt::nlp
