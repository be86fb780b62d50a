#include "hkt/rotor_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "hkt/csv.hpp"

namespace hkt::rotor {

namespace {
constexpr double kAlphaCoverageEps = 1e-9;

#ifndef HKT_BUNDLED_DATA_DIR
#define HKT_BUNDLED_DATA_DIR "data"
#endif
}  // namespace

void AirfoilPolar::validate() const {
  const std::string who = "polar '" + name + "'";
  if (alpha_deg.size() < 2) throw FormatError(who + ": needs at least 2 rows");
  if (alpha_deg.size() != cl.size() || alpha_deg.size() != cd.size())
    throw FormatError(who + ": column lengths differ");
  for (size_t i = 1; i < alpha_deg.size(); ++i) {
    if (!(alpha_deg[i] > alpha_deg[i - 1]))
      throw FormatError(who + ": alpha not strictly increasing at row " +
                        std::to_string(i + 1));
  }
  if (alpha_deg.front() > -180.0 + kAlphaCoverageEps ||
      alpha_deg.back() < 180.0 - kAlphaCoverageEps)
    throw FormatError(who + ": alpha must cover [-180, 180]");
  for (size_t i = 0; i < cd.size(); ++i) {
    if (cd[i] < 0.0)
      throw FormatError(who + ": negative cd at row " + std::to_string(i + 1));
    if (!std::isfinite(cl[i]) || !std::isfinite(cd[i]) || !std::isfinite(alpha_deg[i]))
      throw FormatError(who + ": non-finite value at row " + std::to_string(i + 1));
  }
}

AirfoilPolar load_polar(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int ia = table.column("alpha_deg", path.string());
  const int il = table.column("cl", path.string());
  const int id = table.column("cd", path.string());
  AirfoilPolar p;
  p.name = path.stem().string();
  p.alpha_deg.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 2);
    p.alpha_deg.push_back(csv::parse_double(table.rows[r][ia], ctx));
    p.cl.push_back(csv::parse_double(table.rows[r][il], ctx));
    p.cd.push_back(csv::parse_double(table.rows[r][id], ctx));
  }
  // rows sorted by alpha before validation; duplicates still fail validate()
  std::vector<size_t> order(p.alpha_deg.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return p.alpha_deg[a] < p.alpha_deg[b]; });
  AirfoilPolar sorted;
  sorted.name = p.name;
  for (size_t i : order) {
    sorted.alpha_deg.push_back(p.alpha_deg[i]);
    sorted.cl.push_back(p.cl[i]);
    sorted.cd.push_back(p.cd[i]);
  }
  sorted.validate();
  return sorted;
}

void save_polar(const std::filesystem::path& path, const AirfoilPolar& polar) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(polar.alpha_deg.size());
  for (size_t i = 0; i < polar.alpha_deg.size(); ++i)
    rows.push_back({csv::format_double(polar.alpha_deg[i]), csv::format_double(polar.cl[i]),
                    csv::format_double(polar.cd[i])});
  csv::write(path, {"alpha_deg", "cl", "cd"}, rows);
}

void BladeGeometry::validate() const {
  if (sections.empty()) throw FormatError("geometry: no sections");
  if (!(hub_radius >= 0.0) || !(tip_radius > hub_radius))
    throw FormatError("geometry: invalid hub/tip radii");
  double edge = hub_radius;
  int cylinders = 0;
  for (size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    const std::string who = "geometry section " + std::to_string(i);
    if (!(s.dr > 0.0)) throw FormatError(who + ": dr must be positive");
    if (!(s.r_mid > hub_radius && s.r_mid < tip_radius))
      throw FormatError(who + ": r_mid outside (hub, tip)");
    if (i > 0 && !(s.r_mid > sections[i - 1].r_mid))
      throw FormatError(who + ": r_mid not strictly increasing");
    // spans tile [hub, tip]: midpoint of each span matches r_mid
    const double lo = edge, hi = edge + s.dr;
    if (std::abs(s.r_mid - 0.5 * (lo + hi)) > 1e-9 * tip_radius)
      throw FormatError(who + ": span does not tile previous section");
    edge = hi;
    if (s.kind == SectionKind::cylinder) {
      if (static_cast<int>(i) != cylinders)
        throw FormatError(who + ": cylinder sections must be innermost");
      if (s.is_design_free)
        throw FormatError(who + ": cylinder sections cannot be design-free");
      ++cylinders;
    }
  }
  if (std::abs(edge - tip_radius) > 1e-9 * tip_radius)
    throw FormatError("geometry: spans do not reach tip radius");
  if (cylinders != 3)
    throw FormatError("geometry: expected exactly 3 root cylinder sections, got " +
                      std::to_string(cylinders));
}

std::vector<int> BladeGeometry::free_section_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < sections.size(); ++i)
    if (sections[i].is_design_free) idx.push_back(static_cast<int>(i));
  return idx;
}

std::vector<BoundViolation> validate_bounds(const BladeGeometry& geometry) {
  std::vector<BoundViolation> out;
  for (size_t i = 0; i < geometry.sections.size(); ++i) {
    const auto& s = geometry.sections[i];
    if (!s.is_design_free) continue;
    if (!(s.chord > 0.0))
      out.push_back({static_cast<int>(i), "chord must be positive"});
    else if (s.chord > 1.0)
      out.push_back({static_cast<int>(i), "chord exceeds 1 m"});
    if (s.twist_deg < 0.0)
      out.push_back({static_cast<int>(i), "twist below 0 deg"});
    else if (s.twist_deg > 30.0)
      out.push_back({static_cast<int>(i), "twist exceeds 30 deg"});
  }
  return out;
}

const AirfoilPolar& RotorSpec::polar_for(const BladeSection& s) const {
  const auto it = polars.find(s.polar_id);
  if (it == polars.end())
    throw ConfigError("no polar loaded for id '" + s.polar_id + "'");
  return it->second;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("HKT_DATA_DIR"); env && *env)
    return std::filesystem::path(env);
  return std::filesystem::path(HKT_BUNDLED_DATA_DIR);
}

namespace {

struct AeroNode {
  double r, dr, twist_deg, chord;
  std::string airfoil;
};

std::vector<AeroNode> read_blade_nodes(const std::filesystem::path& file) {
  const auto table = csv::read(file);
  const int ir = table.column("r_m", file.string());
  const int id = table.column("dr_m", file.string());
  const int it = table.column("twist_deg", file.string());
  const int ic = table.column("chord_m", file.string());
  const int ia = table.column("airfoil", file.string());
  std::vector<AeroNode> nodes;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string ctx = file.string() + " row " + std::to_string(r + 2);
    nodes.push_back({csv::parse_double(table.rows[r][ir], ctx),
                     csv::parse_double(table.rows[r][id], ctx),
                     csv::parse_double(table.rows[r][it], ctx),
                     csv::parse_double(table.rows[r][ic], ctx), table.rows[r][ia]});
  }
  if (nodes.size() < 4) throw FormatError(file.string() + ": too few blade nodes");
  return nodes;
}

double interp_nodes(const std::vector<AeroNode>& nodes, double r,
                    double AeroNode::*field) {
  if (r <= nodes.front().r) return nodes.front().*field;
  if (r >= nodes.back().r) return nodes.back().*field;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (r >= nodes[i].r && r <= nodes[i + 1].r) {
      const double w = (r - nodes[i].r) / (nodes[i + 1].r - nodes[i].r);
      return nodes[i].*field + w * (nodes[i + 1].*field - nodes[i].*field);
    }
  }
  return nodes.back().*field;
}

}  // namespace

RotorSpec build_scaled_baseline() { return build_scaled_baseline(default_data_dir()); }

RotorSpec build_scaled_baseline(const std::filesystem::path& data_dir) {
  constexpr double kScale = 0.1;          // 1:10 geometric scaling
  constexpr double kHubRadius = 0.15;     // m, from 0.3 m hub diameter
  constexpr double kTipRadius = 6.3;      // m, from 12.6 m rotor diameter
  constexpr double kInertia = 2234.0;     // kg m^2, published scaled value
  constexpr double kRatedSpeed = 1.6;     // m/s
  constexpr int kNumBlades = 3;
  constexpr int kNumCylinders = 3;
  constexpr int kNumFoils = 7;

  const auto blade_file = data_dir / "nrel5mw_blade.csv";
  std::vector<AeroNode> full;
  try {
    full = read_blade_nodes(blade_file);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError("baseline ingestion failed for " + blade_file.string() + ": " +
                      e.what());
  }

  // scale all lengths by 0.1
  std::vector<AeroNode> nodes = full;
  for (auto& n : nodes) {
    n.r *= kScale;
    n.dr *= kScale;
    n.chord *= kScale;
  }

  BladeGeometry geo;
  geo.hub_radius = kHubRadius;
  geo.tip_radius = kTipRadius;

  // Three root cylinders keep their published spans.
  double edge = kHubRadius;
  for (int i = 0; i < kNumCylinders; ++i) {
    const auto& n = nodes[i];
    if (n.airfoil.find("cylinder") == std::string::npos)
      throw FormatError(blade_file.string() + ": node " + std::to_string(i + 1) +
                        " expected a cylinder airfoil, got '" + n.airfoil + "'");
    BladeSection s;
    s.dr = n.dr;
    // published radii are rounded to 1e-4; rebuild midpoints from spans so
    // the sections tile exactly
    s.r_mid = edge + 0.5 * s.dr;
    s.chord = n.chord;
    s.twist_deg = n.twist_deg;
    s.kind = SectionKind::cylinder;
    s.polar_id = n.airfoil;
    s.is_design_free = false;
    edge += s.dr;
    geo.sections.push_back(s);
  }

  // Seven equal-width foil sections over the remaining span; the single
  // baseline foil polar applies to all of them.
  const double foil_dr = (kTipRadius - edge) / kNumFoils;
  for (int i = 0; i < kNumFoils; ++i) {
    BladeSection s;
    s.dr = foil_dr;
    s.r_mid = edge + (i + 0.5) * foil_dr;
    s.chord = interp_nodes(nodes, s.r_mid, &AeroNode::chord);
    s.twist_deg = interp_nodes(nodes, s.r_mid, &AeroNode::twist_deg);
    s.kind = SectionKind::foil;
    s.polar_id = "du21_a17";
    s.is_design_free = true;
    geo.sections.push_back(s);
  }
  geo.validate();

  RotorSpec spec;
  spec.geometry = std::move(geo);
  spec.num_blades = kNumBlades;
  spec.inertia = kInertia;
  spec.fluid_density = 1000.0;  // fresh water default, configurable by callers
  spec.rated_speed = kRatedSpeed;

  for (const auto& s : spec.geometry.sections) {
    if (spec.polars.count(s.polar_id)) continue;
    const auto polar_file = data_dir / "polars" / (s.polar_id + ".csv");
    try {
      spec.polars.emplace(s.polar_id, load_polar(polar_file));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError("baseline ingestion failed for " + polar_file.string() + ": " +
                        e.what());
    }
  }
  return spec;
}

BladeGeometry load_geometry_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int ir = table.column("r_mid_m", path.string());
  const int id = table.column("dr_m", path.string());
  const int ic = table.column("chord_m", path.string());
  const int it = table.column("twist_deg", path.string());
  const int ik = table.column("kind", path.string());
  const int ip = table.column("polar_id", path.string());
  const int ifree = table.column("free", path.string());

  BladeGeometry geo;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 2);
    BladeSection s;
    s.r_mid = csv::parse_double(table.rows[r][ir], ctx);
    s.dr = csv::parse_double(table.rows[r][id], ctx);
    s.chord = csv::parse_double(table.rows[r][ic], ctx);
    s.twist_deg = csv::parse_double(table.rows[r][it], ctx);
    const std::string& kind = table.rows[r][ik];
    if (kind == "cylinder")
      s.kind = SectionKind::cylinder;
    else if (kind == "foil")
      s.kind = SectionKind::foil;
    else
      throw FormatError(ctx + ": unknown kind '" + kind + "'");
    s.polar_id = table.rows[r][ip];
    const std::string& free = table.rows[r][ifree];
    if (free == "1" || free == "true")
      s.is_design_free = true;
    else if (free == "0" || free == "false")
      s.is_design_free = false;
    else
      throw FormatError(ctx + ": unknown free flag '" + free + "'");
    geo.sections.push_back(s);
  }
  if (geo.sections.empty()) throw FormatError(path.string() + ": no sections");
  geo.hub_radius = geo.sections.front().r_mid - 0.5 * geo.sections.front().dr;
  geo.tip_radius = geo.sections.back().r_mid + 0.5 * geo.sections.back().dr;
  geo.validate();
  return geo;
}

void save_geometry_csv(const std::filesystem::path& path, const BladeGeometry& geometry) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : geometry.sections) {
    rows.push_back({csv::format_double(s.r_mid), csv::format_double(s.dr),
                    csv::format_double(s.chord), csv::format_double(s.twist_deg),
                    s.kind == SectionKind::cylinder ? "cylinder" : "foil", s.polar_id,
                    s.is_design_free ? "1" : "0"});
  }
  csv::write(path, {"r_mid_m", "dr_m", "chord_m", "twist_deg", "kind", "polar_id", "free"},
             rows);
}

RotorSpec with_geometry(const RotorSpec& spec, BladeGeometry geometry) {
  RotorSpec out = spec;
  out.geometry = std::move(geometry);
  return out;
}

}  // namespace hkt::rotor
