#pragma once

#include "hkt/rotor_model.hpp"

// Textbook fixed-point BEM iteration on the induction factors, coded
// independently of the production solver (own interpolation, own loss
// factors, the thrust-coefficient form of the high-induction correction).
// Test oracle only.
namespace bem_oracle {

struct Inputs {
  double r, dr, hub_radius, tip_radius;
  int num_blades;
  double rho;
  double chord, twist_deg;
  double v, omega;
  const hkt::rotor::AirfoilPolar* polar;
};

struct Result {
  bool converged = false;
  double a = 0.0, a_t = 0.0, phi = 0.0;
  double dT = 0.0, dQ = 0.0;  // per blade, integrated over dr
};

Result fixed_point(const Inputs& in);

}  // namespace bem_oracle
