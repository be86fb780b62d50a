#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hkt/dual.hpp"
#include "hkt/errors.hpp"

namespace hkt::rotor {

// Full-range angle-of-attack table, degrees, covering [-180, 180].
struct AirfoilPolar {
  std::string name;
  std::vector<double> alpha_deg;
  std::vector<double> cl;
  std::vector<double> cd;

  // Throws FormatError on non-monotone alpha, missing +-180 coverage,
  // negative cd, or mismatched lengths.
  void validate() const;

  // Piecewise-linear interpolation, exact at nodes, alpha wrapped into
  // [-180, 180]. Generic over double / ad::Dual so BEM code differentiates
  // through the table.
  template <class T>
  void lookup(const T& alpha, T& cl_out, T& cd_out) const {
    T a = alpha;
    // wrap by full turns; shift is locally constant so the derivative is 1
    while (ad::value(a) > 180.0) a = a - 360.0;
    while (ad::value(a) < -180.0) a = a + 360.0;
    const double av = ad::value(a);
    // locate cell by binary search on the value
    size_t lo = 0, hi = alpha_deg.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (alpha_deg[mid] <= av)
        lo = mid;
      else
        hi = mid;
    }
    const double a0 = alpha_deg[lo], a1 = alpha_deg[hi];
    const double w = a1 - a0;
    cl_out = cl[lo] + (a - a0) * ((cl[hi] - cl[lo]) / w);
    cd_out = cd[lo] + (a - a0) * ((cd[hi] - cd[lo]) / w);
  }

  std::pair<double, double> lookup(double alpha) const {
    double l = 0.0, d = 0.0;
    lookup(alpha, l, d);
    return {l, d};
  }
};

AirfoilPolar load_polar(const std::filesystem::path& path);
void save_polar(const std::filesystem::path& path, const AirfoilPolar& polar);

enum class SectionKind { cylinder, foil };

struct BladeSection {
  double r_mid = 0.0;     // radial station of section midpoint, m
  double dr = 0.0;        // section span, m
  double chord = 0.0;     // m
  double twist_deg = 0.0; // degrees
  SectionKind kind = SectionKind::foil;
  std::string polar_id;
  bool is_design_free = true;
};

struct BladeGeometry {
  std::vector<BladeSection> sections;
  double hub_radius = 0.0;
  double tip_radius = 0.0;

  // Structural invariants: ordering, span tiling, three root cylinders.
  void validate() const;
  std::vector<int> free_section_indices() const;
};

struct BoundViolation {
  int section = -1;
  std::string what;
};

// Empty iff every design-free section satisfies 0 < chord <= 1 m and
// 0 <= twist <= 30 deg.
std::vector<BoundViolation> validate_bounds(const BladeGeometry& geometry);

struct RotorSpec {
  BladeGeometry geometry;
  int num_blades = 3;
  double inertia = 0.0;        // kg m^2
  double fluid_density = 0.0;  // kg/m^3
  double rated_speed = 0.0;    // m/s, informational
  std::map<std::string, AirfoilPolar> polars;

  const AirfoilPolar& polar_for(const BladeSection& s) const;
};

// Resolution order: explicit argument > HKT_DATA_DIR env var > compiled-in
// bundled directory.
std::filesystem::path default_data_dir();

// The 1:10 scaled baseline: reads the bundled full-scale NREL 5MW blade
// table and polars, scales all lengths by 0.1, and re-grids to 10 sections
// (3 root cylinders kept on their scaled spans, 7 equal-width foil sections
// with chord/twist interpolated at section midpoints). Inertia and blade
// count are the published scaled-model values.
RotorSpec build_scaled_baseline();
RotorSpec build_scaled_baseline(const std::filesystem::path& data_dir);

// Geometry CSV: header r_mid_m,dr_m,chord_m,twist_deg,kind,polar_id,free
BladeGeometry load_geometry_csv(const std::filesystem::path& path);
void save_geometry_csv(const std::filesystem::path& path, const BladeGeometry& geometry);

// Replace a spec's geometry, keeping polars/constants.
RotorSpec with_geometry(const RotorSpec& spec, BladeGeometry geometry);

}  // namespace hkt::rotor
