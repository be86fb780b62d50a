#pragma once

#include <string>
#include <vector>

#include "hkt/colloc.hpp"
#include "hkt/dynamics.hpp"
#include "hkt/nlp.hpp"
#include "hkt/rotor_model.hpp"

namespace hkt::pipelines {

// Design variables of the steady problem: free-section chords/twists.
// lambda_design is the tip-speed ratio the steady objective is evaluated
// at; it is a per-run parameter (the "lambda initial guess"), not an
// optimization variable. The reported lambda* is the argmax of the
// optimized geometry's Cp curve.
struct DesignVector {
  std::vector<double> chords;  // m
  std::vector<double> twists;  // deg
  double lambda_design = 8.0;

  static DesignVector from_geometry(const rotor::BladeGeometry& geometry,
                                    double lambda_design);
  rotor::BladeGeometry apply_to(const rotor::BladeGeometry& base) const;
};

struct SteadyDesignResult {
  DesignVector design;
  double cp_star = 0.0;
  double lambda_star = 0.0;
  nlp::NlpSolution solution;
};

struct ControlResult {
  dyn::Trajectory trajectory;
  nlp::NlpSolution solution;
};

struct PipelineOptions {
  nlp::SolveOptions solver;
  double lambda_seed = 8.0;  // steady lambda_design init and omega-trajectory seed
  bool resimulate = true;
};

// Steady Cp maximization over (chords, twists) at init.lambda_design, with
// the design bounds; cylindrical root sections untouched.
SteadyDesignResult optimize_steady_design(const rotor::RotorSpec& base,
                                          const DesignVector& init,
                                          const nlp::SolveOptions& solver = {});

// Fixed-geometry optimal control over the transcribed OCP. lambda_seed <= 0
// seeds the rotor-speed trajectory at the geometry's own optimum.
ControlResult optimize_control(const rotor::RotorSpec& spec, const dyn::FlowProfile& profile,
                               const colloc::OcpConfig& cfg, double lambda_seed = -1.0,
                               const nlp::SolveOptions& solver = {});

struct MethodResult {
  std::string method;  // baseline | sequential | ccd
  dyn::FlowProfile profile;
  colloc::OcpConfig cfg;
  rotor::BladeGeometry geometry;
  dyn::Trajectory trajectory;
  double energy_kj = 0.0;
  double resim_energy_kj = 0.0;
  double improvement_pct = 0.0;  // filled by compare()
  double wall_time_s = 0.0;
  double cp_star = 0.0;
  double lambda_star = 0.0;
  double saturation_fraction = 0.0;
  nlp::NlpSolution::Status status = nlp::NlpSolution::Status::failure;
  double feasibility = 0.0;
  double optimality = 0.0;
  int iterations = 0;
  std::vector<std::string> notes;
};

// Baseline geometry with optimal control.
MethodResult run_baseline(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                          const colloc::OcpConfig& cfg, const PipelineOptions& options = {});

// Steady design first, then optimal control on the frozen geometry.
MethodResult run_sequential(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                            const colloc::OcpConfig& cfg, const DesignVector& init,
                            const PipelineOptions& options = {});

// Joint NLP over (chords, twists, u nodes, omega nodes).
MethodResult run_ccd(const rotor::RotorSpec& baseline, const dyn::FlowProfile& profile,
                     const colloc::OcpConfig& cfg, const DesignVector& init,
                     const PipelineOptions& options = {});

struct ComparisonReport {
  dyn::FlowProfile profile;
  colloc::OcpConfig cfg;
  std::vector<MethodResult> entries;
};

// Improvement percentages vs the baseline entry; throws ConfigError when the
// entries do not share profile and OCP configuration.
ComparisonReport compare(std::vector<MethodResult> entries);

// Time fraction the control spends at its upper bound.
double saturation_fraction(const dyn::Trajectory& traj, double u_max);

bool profiles_equal(const dyn::FlowProfile& a, const dyn::FlowProfile& b);
bool configs_equal(const colloc::OcpConfig& a, const colloc::OcpConfig& b);

}  // namespace hkt::pipelines
