#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "hkt/bem.hpp"
#include "hkt/csv.hpp"
#include "hkt/pipelines.hpp"
#include "hkt/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ScenarioConfig {
  int schema_version = 1;
  hkt::dyn::FlowProfile profile;
  double u_max = std::numeric_limits<double>::infinity();
  std::vector<std::string> methods;
  std::string initial_geometry = "baseline";
  double lambda_seed = 8.0;
  int segments = 30;
  double horizon = 150.0;
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  bool omega0_free = true;
  double omega0_value = 0.0;
  double fluid_density = 1000.0;
  std::string output_dir = "out";
};

template <class T>
T require(const json& j, const std::string& field) {
  if (!j.contains(field)) throw hkt::ConfigError("config: missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw hkt::ConfigError("config: bad value for field '" + field + "': " + e.what());
  }
}

template <class T>
T optional_field(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw hkt::ConfigError("config: bad value for field '" + field + "': " + e.what());
  }
}

hkt::dyn::FlowProfile parse_profile(const json& j) {
  const auto kind = require<std::string>(j, "kind");
  const auto duration = require<double>(j, "duration");
  if (kind == "sinusoidal")
    return hkt::dyn::FlowProfile::sinusoidal(require<double>(j, "mean"),
                                             require<double>(j, "amplitude"),
                                             require<double>(j, "angular_rate"), duration);
  if (kind == "ramp")
    return hkt::dyn::FlowProfile::ramp(require<double>(j, "offset"),
                                       require<double>(j, "gain"),
                                       require<double>(j, "rate"),
                                       require<double>(j, "exponent"), duration);
  if (kind == "table") {
    auto pts = require<std::vector<std::vector<double>>>(j, "points");
    std::vector<std::pair<double, double>> samples;
    for (const auto& p : pts) {
      if (p.size() != 2)
        throw hkt::ConfigError("config: profile.points entries must be [t, v] pairs");
      samples.emplace_back(p[0], p[1]);
    }
    auto prof = hkt::dyn::FlowProfile::tabulated(std::move(samples));
    prof.duration = duration;
    prof.validate();
    return prof;
  }
  throw hkt::ConfigError("config: unknown profile.kind '" + kind + "'");
}

ScenarioConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw hkt::ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw hkt::ConfigError("config parse error in " + path.string() + ": " + e.what());
  }

  ScenarioConfig cfg;
  cfg.schema_version = optional_field<int>(j, "schema_version", 1);
  if (cfg.schema_version != 1)
    throw hkt::ConfigError("config: unsupported schema_version " +
                           std::to_string(cfg.schema_version));
  if (!j.contains("profile")) throw hkt::ConfigError("config: missing field 'profile'");
  cfg.profile = parse_profile(j.at("profile"));

  if (!j.contains("u_max")) throw hkt::ConfigError("config: missing field 'u_max'");
  if (j.at("u_max").is_string()) {
    const auto s = j.at("u_max").get<std::string>();
    if (s != "unbounded")
      throw hkt::ConfigError("config: u_max must be a number or \"unbounded\", got '" + s +
                             "'");
  } else {
    cfg.u_max = require<double>(j, "u_max");
    if (!(cfg.u_max > 0.0)) throw hkt::ConfigError("config: u_max must be positive");
  }

  cfg.methods = require<std::vector<std::string>>(j, "methods");
  if (cfg.methods.empty()) throw hkt::ConfigError("config: methods list is empty");
  for (const auto& m : cfg.methods)
    if (m != "baseline" && m != "sequential" && m != "ccd")
      throw hkt::ConfigError("config: unknown method '" + m +
                             "' in field 'methods' (expected baseline|sequential|ccd)");

  cfg.initial_geometry = optional_field<std::string>(j, "initial_geometry", "baseline");
  cfg.lambda_seed = optional_field<double>(j, "lambda_seed", 8.0);
  cfg.segments = optional_field<int>(j, "segments", 30);
  cfg.horizon = optional_field<double>(j, "horizon", cfg.profile.duration);
  cfg.feas_tol = optional_field<double>(j, "feasibility_tol", 1e-6);
  cfg.opt_tol = optional_field<double>(j, "optimality_tol", 1e-6);
  cfg.fluid_density = optional_field<double>(j, "fluid_density", 1000.0);
  cfg.output_dir = optional_field<std::string>(j, "output_dir", "out");

  if (j.contains("omega0") && !j.at("omega0").is_string()) {
    cfg.omega0_free = false;
    cfg.omega0_value = require<double>(j, "omega0");
  } else if (j.contains("omega0")) {
    const auto s = j.at("omega0").get<std::string>();
    if (s != "free")
      throw hkt::ConfigError("config: omega0 must be a number or \"free\", got '" + s + "'");
  }
  return cfg;
}

std::vector<std::string> validate_config(const fs::path& path,
                                         const std::optional<fs::path>& data_dir) {
  std::vector<std::string> diags;
  ScenarioConfig cfg;
  try {
    cfg = parse_config(path);
  } catch (const hkt::Error& e) {
    diags.push_back(e.what());
    return diags;
  }
  if (cfg.profile.duration < cfg.horizon)
    diags.push_back("profile.duration (" + std::to_string(cfg.profile.duration) +
                    ") is shorter than horizon (" + std::to_string(cfg.horizon) + ")");
  if (cfg.segments < 1) diags.push_back("segments must be >= 1");
  if (!(cfg.feas_tol > 0.0)) diags.push_back("feasibility_tol must be positive");
  if (!(cfg.opt_tol > 0.0)) diags.push_back("optimality_tol must be positive");
  if (!(cfg.fluid_density > 0.0)) diags.push_back("fluid_density must be positive");
  if (cfg.initial_geometry != "baseline" && !fs::exists(cfg.initial_geometry))
    diags.push_back("initial_geometry file does not exist: " + cfg.initial_geometry);
  try {
    const auto dir = data_dir ? *data_dir : hkt::rotor::default_data_dir();
    hkt::rotor::build_scaled_baseline(dir);
  } catch (const hkt::Error& e) {
    diags.push_back(std::string("baseline data not loadable: ") + e.what());
  }
  return diags;
}

int cmd_run(const fs::path& config_path, int jobs, std::optional<fs::path> out_override,
            std::optional<fs::path> data_dir) {
  ScenarioConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const hkt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const auto diags = validate_config(config_path, data_dir);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d << "\n";
    return 2;
  }

  const fs::path out_dir = out_override ? *out_override : fs::path(cfg.output_dir);
  fs::create_directories(out_dir);

  auto baseline =
      hkt::rotor::build_scaled_baseline(data_dir ? *data_dir : hkt::rotor::default_data_dir());
  baseline.fluid_density = cfg.fluid_density;

  hkt::rotor::BladeGeometry init_geometry = baseline.geometry;
  if (cfg.initial_geometry != "baseline")
    init_geometry = hkt::rotor::load_geometry_csv(cfg.initial_geometry);
  const auto init =
      hkt::pipelines::DesignVector::from_geometry(init_geometry, cfg.lambda_seed);
  const auto init_spec = hkt::rotor::with_geometry(baseline, init_geometry);

  hkt::colloc::OcpConfig ocp;
  ocp.horizon = cfg.horizon;
  ocp.num_segments = cfg.segments;
  ocp.u_max = cfg.u_max;
  ocp.omega0_mode = cfg.omega0_free ? hkt::colloc::OcpConfig::Omega0Mode::free_start
                                    : hkt::colloc::OcpConfig::Omega0Mode::fixed_start;
  ocp.omega0_value = cfg.omega0_value;

  struct Slot {
    std::optional<hkt::pipelines::MethodResult> result;
    std::string error;
  };
  std::vector<Slot> slots(cfg.methods.size());

  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.methods.size())));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < cfg.methods.size(); i = next.fetch_add(1)) {
      const std::string& method = cfg.methods[i];
      std::ofstream log(out_dir / (method + "_solver.log"));
      hkt::pipelines::PipelineOptions options;
      options.solver.feas_tol = cfg.feas_tol;
      options.solver.opt_tol = cfg.opt_tol;
      options.solver.log = log ? &log : nullptr;
      options.lambda_seed = cfg.lambda_seed;
      try {
        if (method == "baseline")
          slots[i].result =
              hkt::pipelines::run_baseline(init_spec, cfg.profile, ocp, options);
        else if (method == "sequential")
          slots[i].result =
              hkt::pipelines::run_sequential(init_spec, cfg.profile, ocp, init, options);
        else
          slots[i].result =
              hkt::pipelines::run_ccd(init_spec, cfg.profile, ocp, init, options);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<hkt::pipelines::MethodResult> entries;
  bool all_converged = true;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].result) {
      entries.push_back(std::move(*slots[i].result));
      if (entries.back().status != hkt::nlp::NlpSolution::Status::converged)
        all_converged = false;
    } else {
      std::cerr << "method '" << cfg.methods[i] << "' failed: " << slots[i].error << "\n";
      all_converged = false;
    }
  }
  if (entries.empty()) return 1;

  hkt::pipelines::ComparisonReport report;
  if (entries.size() >= 2) {
    report = hkt::pipelines::compare(std::move(entries));
  } else {
    report.profile = entries.front().profile;
    report.cfg = entries.front().cfg;
    report.entries = std::move(entries);
  }
  hkt::report::write_report(out_dir, report, baseline);

  std::cout << "report written to " << (out_dir / "report.md").string() << "\n";
  for (const auto& e : report.entries)
    std::cout << "  " << e.method << ": " << e.energy_kj << " kJ ("
              << (e.improvement_pct >= 0 ? "+" : "") << e.improvement_pct << "%)\n";
  return all_converged ? 0 : 1;
}

int cmd_validate(const fs::path& config_path, std::optional<fs::path> data_dir) {
  const auto diags = validate_config(config_path, data_dir);
  if (diags.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& d : diags) std::cout << d << "\n";
  return 1;
}

int cmd_cp_curve(const std::string& geometry, const std::string& out,
                 std::optional<fs::path> data_dir, double lo, double hi, double step) {
  auto spec =
      hkt::rotor::build_scaled_baseline(data_dir ? *data_dir : hkt::rotor::default_data_dir());
  if (geometry != "baseline")
    spec = hkt::rotor::with_geometry(spec, hkt::rotor::load_geometry_csv(geometry));

  std::vector<double> lambdas;
  for (double l = lo; l <= hi + 1e-9; l += step) lambdas.push_back(l);
  const auto curve = hkt::bem::cp_curve(spec, lambdas);

  std::vector<std::vector<std::string>> rows;
  for (const auto& p : curve) {
    if (!p.ok) {
      std::cerr << "lambda " << p.lambda << ": " << p.error << "\n";
      continue;
    }
    rows.push_back({hkt::csv::format_double(p.lambda), hkt::csv::format_double(p.cp)});
  }
  if (out.empty()) {
    std::cout << "lambda,cp\n";
    for (const auto& r : rows) std::cout << r[0] << "," << r[1] << "\n";
  } else {
    hkt::csv::write(out, {"lambda", "cp"}, rows);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hydrokinetic turbine rotor design and control co-design toolkit"};
  app.require_subcommand(1);

  std::string config_path, geometry = "baseline", out_file;
  std::string data_dir_flag;
  int jobs = 0;
  std::string out_dir_flag;
  double lam_lo = 2.0, lam_hi = 13.0, lam_step = 0.1;

  auto add_data_dir = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir_flag,
                    "data directory (default: HKT_DATA_DIR or the bundled directory)");
  };

  auto* run = app.add_subcommand("run", "run the scenario described by a JSON config");
  run->add_option("config", config_path, "scenario config JSON")->required();
  run->add_option("--jobs", jobs, "parallel method workers (default: hardware)");
  run->add_option("--out", out_dir_flag, "output directory override");
  add_data_dir(run);

  auto* validate = app.add_subcommand("validate", "validate a config without solving");
  validate->add_option("config", config_path, "scenario config JSON")->required();
  add_data_dir(validate);

  auto* cp = app.add_subcommand("cp-curve", "steady Cp(lambda) for a geometry");
  cp->add_option("geometry", geometry, "geometry CSV (or 'baseline')");
  cp->add_option("--out", out_file, "output CSV (default: stdout)");
  cp->add_option("--lambda-min", lam_lo, "lowest tip speed ratio");
  cp->add_option("--lambda-max", lam_hi, "highest tip speed ratio");
  cp->add_option("--step", lam_step, "lambda grid step");
  add_data_dir(cp);

  CLI11_PARSE(app, argc, argv);

  std::optional<fs::path> data_dir;
  if (!data_dir_flag.empty()) data_dir = data_dir_flag;

  try {
    if (run->parsed())
      return cmd_run(config_path, jobs,
                     out_dir_flag.empty() ? std::nullopt
                                          : std::optional<fs::path>(out_dir_flag),
                     data_dir);
    if (validate->parsed()) return cmd_validate(config_path, data_dir);
    if (cp->parsed())
      return cmd_cp_curve(geometry, out_file, data_dir, lam_lo, lam_hi, lam_step);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
