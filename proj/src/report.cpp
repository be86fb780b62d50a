#include "hkt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hkt/bem.hpp"
#include "hkt/csv.hpp"
#include "hkt/svg.hpp"

namespace hkt::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void LineChart::add_series(std::string name, std::vector<double> x, std::vector<double> y) {
  series_.push_back({std::move(name), std::move(x), std::move(y)});
}

void LineChart::write(const std::filesystem::path& path) const {
  constexpr double W = 760, H = 460, ml = 70, mr = 160, mt = 40, mb = 55;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  bool first = true;
  for (const auto& s : series_) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        first = false;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (xhi - xlo < 1e-30) xhi = xlo + 1.0;
  if (yhi - ylo < 1e-30) yhi = ylo + 1.0;
  const double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ylo) / (yhi - ylo) * ph; };

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[256];
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='22' text-anchor='middle' font-size='16' "
      << "font-family='sans-serif'>" << title_ << "</text>\n";

  // axes and ticks
  std::snprintf(buf, sizeof buf,
                "<rect x='%.1f' y='%.1f' width='%.1f' height='%.1f' fill='none' "
                "stroke='#333'/>\n",
                ml, mt, pw, ph);
  out << buf;
  for (int i = 0; i <= 5; ++i) {
    const double xv = xlo + (xhi - xlo) * i / 5;
    const double yv = ylo + (yhi - ylo) * i / 5;
    std::snprintf(buf, sizeof buf,
                  "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#ccc'/>\n",
                  px(xv), mt, px(xv), mt + ph);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#ccc'/>\n", ml,
                  py(yv), ml + pw, py(yv));
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x='%.1f' y='%.1f' text-anchor='middle' font-size='11' "
                  "font-family='sans-serif'>%.4g</text>\n",
                  px(xv), mt + ph + 16, xv);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x='%.1f' y='%.1f' text-anchor='end' font-size='11' "
                  "font-family='sans-serif'>%.4g</text>\n",
                  ml - 6, py(yv) + 4, yv);
    out << buf;
  }
  out << "<text x='" << ml + pw / 2 << "' y='" << H - 12
      << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << x_label_
      << "</text>\n";
  out << "<text x='18' y='" << mt + ph / 2
      << "' text-anchor='middle' font-size='13' font-family='sans-serif' "
      << "transform='rotate(-90 18 " << mt + ph / 2 << ")'>" << y_label_ << "</text>\n";

  for (size_t si = 0; si < series_.size(); ++si) {
    const auto& s = series_[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.8' points='";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      out << buf;
    }
    out << "'/>\n";
    const double ly = mt + 16 + 18.0 * si;
    std::snprintf(buf, sizeof buf,
                  "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='%s' "
                  "stroke-width='3'/>\n",
                  ml + pw + 12, ly, ml + pw + 36, ly, color);
    out << buf;
    out << "<text x='" << ml + pw + 42 << "' y='" << ly + 4
        << "' font-size='12' font-family='sans-serif'>" << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace hkt::svg

namespace hkt::report {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string status_name(nlp::NlpSolution::Status s) {
  switch (s) {
    case nlp::NlpSolution::Status::converged: return "converged";
    case nlp::NlpSolution::Status::iteration_limit: return "iteration-limit";
    case nlp::NlpSolution::Status::failure: return "failure";
  }
  return "?";
}

}  // namespace

std::string describe_profile(const dyn::FlowProfile& profile) {
  std::ostringstream s;
  switch (profile.kind) {
    case dyn::FlowProfile::Kind::sinusoidal:
      s << "v(t) = " << profile.mean << " + " << profile.amplitude << " sin("
        << profile.angular_rate << " t)";
      break;
    case dyn::FlowProfile::Kind::ramp:
      s << "v(t) = " << profile.offset << " - " << profile.gain << " (" << profile.rate
        << " t)^" << profile.exponent;
      break;
    case dyn::FlowProfile::Kind::table:
      s << "tabulated profile with " << profile.samples.size() << " samples";
      break;
  }
  s << " over " << profile.duration << " s";
  return s.str();
}

void write_report(const std::filesystem::path& dir,
                  const pipelines::ComparisonReport& report,
                  const rotor::RotorSpec& baseline) {
  std::filesystem::create_directories(dir);

  // per-method artifacts
  std::vector<double> lambdas;
  for (double l = 2.0; l <= 13.0 + 1e-9; l += 0.2) lambdas.push_back(l);

  svg::LineChart cp_chart("Power coefficient vs tip speed ratio", "lambda", "Cp");
  svg::LineChart chord_chart("Chord distribution", "r (m)", "chord (m)");
  svg::LineChart twist_chart("Twist distribution", "r (m)", "twist (deg)");
  svg::LineChart omega_chart("Rotor speed", "t (s)", "omega (rad/s)");
  svg::LineChart u_chart("Control torque", "t (s)", "u (N m)");

  for (const auto& e : report.entries) {
    const auto spec = rotor::with_geometry(baseline, e.geometry);
    const auto curve = bem::cp_curve(spec, lambdas);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> xs, ys;
    for (const auto& p : curve) {
      if (!p.ok) continue;
      rows.push_back({csv::format_double(p.lambda), csv::format_double(p.cp)});
      xs.push_back(p.lambda);
      ys.push_back(p.cp);
    }
    csv::write(dir / ("cp_curve_" + e.method + ".csv"), {"lambda", "cp"}, rows);
    cp_chart.add_series(e.method, xs, ys);

    rotor::save_geometry_csv(dir / ("geometry_" + e.method + ".csv"), e.geometry);
    dyn::save_trajectory_csv(dir / ("trajectory_" + e.method + ".csv"), e.trajectory,
                             report.profile);

    std::vector<double> rr, cc, tt;
    for (const auto& s : e.geometry.sections) {
      rr.push_back(s.r_mid);
      cc.push_back(s.chord);
      tt.push_back(s.twist_deg);
    }
    chord_chart.add_series(e.method, rr, cc);
    twist_chart.add_series(e.method, rr, tt);
    omega_chart.add_series(e.method, e.trajectory.times, e.trajectory.omega);
    u_chart.add_series(e.method, e.trajectory.times, e.trajectory.u);
  }

  cp_chart.write(dir / "cp_lambda.svg");
  chord_chart.write(dir / "chord.svg");
  twist_chart.write(dir / "twist.svg");
  omega_chart.write(dir / "omega.svg");
  u_chart.write(dir / "u.svg");

  // inflow profile figure + csv
  {
    std::vector<double> ts, vs;
    std::vector<std::vector<std::string>> rows;
    const int n = 600;
    for (int i = 0; i <= n; ++i) {
      const double t = report.profile.duration * i / n;
      const double v = dyn::flow_velocity(report.profile, t);
      ts.push_back(t);
      vs.push_back(v);
      rows.push_back({csv::format_double(t), csv::format_double(v)});
    }
    csv::write(dir / "flow_profile.csv", {"t_s", "v_mps"}, rows);
    svg::LineChart v_chart("Inflow speed", "t (s)", "v (m/s)");
    v_chart.add_series("v", ts, vs);
    v_chart.write(dir / "flow_profile.svg");
  }

  std::ofstream md(dir / "report.md");
  if (!md) throw Error("cannot write " + (dir / "report.md").string());
  md << "# Energy production comparison\n\n";
  md << "Flow: " << describe_profile(report.profile) << "\n\n";
  if (report.cfg.bounded())
    md << "Control bound: u_max = " << report.cfg.u_max << " N m\n\n";
  else
    md << "Control bound: none (u unbounded)\n\n";
  md << "Collocation: " << report.cfg.num_segments << " Hermite-Simpson segments over "
     << report.cfg.horizon << " s\n\n";

  md << "| Design Method | Computation Time (s) | Generated Energy (kJ) | Improvement (%) |\n";
  md << "|---|---|---|---|\n";
  for (const auto& e : report.entries) {
    md << "| " << e.method << " | " << fmt("%.0f", e.wall_time_s) << " | "
       << fmt("%.0f", e.energy_kj) << " | " << fmt("%+.1f", e.improvement_pct) << " |\n";
  }
  md << "\n(Computation time is informational only and machine dependent.)\n\n";

  md << "| Method | max Cp | lambda* | Saturation (% of time) | Re-simulated energy (kJ) "
        "| Solver | Feasibility | Optimality |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& e : report.entries) {
    md << "| " << e.method << " | " << fmt("%.4f", e.cp_star) << " | "
       << fmt("%.2f", e.lambda_star) << " | " << fmt("%.1f", 100.0 * e.saturation_fraction)
       << " | " << fmt("%.0f", e.resim_energy_kj) << " | " << status_name(e.status) << " | "
       << fmt("%.2e", e.feasibility) << " | " << fmt("%.2e", e.optimality) << " |\n";
  }
  md << "\n";
  for (const auto& e : report.entries) {
    if (e.notes.empty()) continue;
    md << "Notes (" << e.method << "):\n";
    for (const auto& n : e.notes) md << "- " << n << "\n";
    md << "\n";
  }
  md << "Figures: cp_lambda.svg, chord.svg, twist.svg, omega.svg, u.svg, "
        "flow_profile.svg (each backed by the CSV of the same series).\n";
}

}  // namespace hkt::report
