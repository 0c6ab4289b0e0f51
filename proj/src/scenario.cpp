#include "clogsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace clogsim {
namespace {

using nlohmann::json;

json params_to_json(const ModelParams& p) {
  json j;
  j["N"] = p.N;
  j["d"] = p.d;
  j["a"] = p.a;
  j["alpha_v"] = p.alpha_v;
  j["beta"] = p.beta;
  j["gamma"] = p.gamma;
  j["alpha_r"] = p.alpha_r;
  j["b_r"] = p.b_r;
  if (std::isfinite(p.t0)) j["t0"] = p.t0;
  j["domain_area"] = p.domain_area;
  j["kappa"] = p.kappa;
  return j;
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  try {
    p.N = j.at("N").get<int>();
    p.d = j.at("d").get<std::vector<double>>();
    p.a = j.at("a").get<std::vector<double>>();
    p.alpha_v = j.at("alpha_v").get<std::vector<double>>();
    p.beta = j.at("beta").get<std::vector<double>>();
    p.gamma = j.at("gamma").get<std::vector<std::vector<double>>>();
    p.alpha_r = j.at("alpha_r").get<double>();
    p.b_r = j.at("b_r").get<double>();
    p.t0 = j.contains("t0") ? j.at("t0").get<double>()
                            : std::numeric_limits<double>::infinity();
    p.domain_area = j.value("domain_area", 1.0);
    p.kappa = j.value("kappa", 1.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad model parameters: ") + e.what());
  }
  return p;
}

constexpr double kSnapTol = 1e-9;

// shortest decimal form that parses back to the same double
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double ScenarioConfig::time_step() const {
  if (dt > 0.0) return dt;
  const double dx = 1.0 / (grid_points - 1);
  return dt_ratio * dx * dx;
}

void ScenarioConfig::validate() const {
  params.validate();
  if (grid_points < 3) throw ConfigError("grid must have at least 3 points per side");
  if (!(T > 0.0)) throw ConfigError("final time must be positive");
  if (!(time_step() > 0.0)) throw ConfigError("time step must be positive");
  if (static_cast<int>(u0.size()) != params.N)
    throw ConfigError("u0 must list one value per species");
  for (const double v : u0)
    if (!(v >= 0.0)) throw ConfigError("initial concentrations must be nonnegative");
  if (!(v0 >= 0.0)) throw ConfigError("initial deposit must be nonnegative");
  for (const double s : snapshot_times)
    if (s < -kSnapTol || s > T + kSnapTol)
      throw ConfigError("snapshot times must lie in [0, T]");
  if (scheme != "explicit" && scheme != "picard")
    throw ConfigError("scheme must be 'explicit' or 'picard'");
  if (monitor_policy != "warn" && monitor_policy != "abort")
    throw ConfigError("monitor policy must be 'warn' or 'abort'");
  if (inflow.type != "zero" && inflow.type != "parabolic" &&
      inflow.type != "parabolic-literal" && inflow.type != "constant")
    throw ConfigError("unknown inflow type: " + inflow.type);
  if (inflow.species < 1 || inflow.species > params.N)
    throw ConfigError("inflow species index out of range");
  if (r0.type == "constant") {
    if (!(r0.value > 0.0 && r0.value < 0.5))
      throw ConfigError("initial radius must lie in (0, 1/2)");
  } else if (r0.type == "bumps") {
    if (!(r0.r_c > 0.0)) throw ConfigError("bump base radius must be positive");
  } else if (r0.type == "file") {
    if (r0.file.empty()) throw ConfigError("radius field file not given");
  } else {
    throw ConfigError("unknown initial radius type: " + r0.type);
  }
}

ScenarioConfig preset_uniform() {
  ScenarioConfig c;
  c.params.N = 3;
  c.params.d = {0.3, 0.5, 0.99};
  c.params.a = {0.9, 0.5, 0.3};
  // absorption well below deposition keeps the immobile phase under its
  // equilibrium, so the radius source stays nonnegative and the deposit layer
  // keeps growing (slightly) even after the inflow shuts off
  c.params.alpha_v = {0.1, 0.1, 0.1};
  c.params.beta = {1.0, 1.0, 1.0};
  c.params.gamma.assign(3, std::vector<double>(3, 10.0));
  c.params.alpha_r = 1.0;
  c.params.b_r = 0.5;
  c.params.t0 = 2.0;
  c.grid_points = 41;
  c.dt_ratio = 0.2;
  c.T = 3.0;
  c.inflow = {"parabolic", 25.0, 1};
  c.u0 = {0.0, 0.0, 0.0};
  c.v0 = 0.0;
  c.r0.type = "constant";
  c.r0.value = 0.1;
  c.snapshot_times = {0.5, 0.75, 1.5, 2.25, 3.0};
  return c;
}

ScenarioConfig preset_bumps() {
  ScenarioConfig c = preset_uniform();
  c.dt_ratio = 0.25;
  // the 0.25 ratio sits above the explicit guard for tables reaching small
  // radii, so this preset defaults to the semi-implicit scheme
  c.scheme = "picard";
  c.r0.type = "bumps";
  c.r0.r_c = 0.05;
  c.r0.r_1 = 0.35;
  c.r0.c = 60.0;
  return c;
}

std::string serialize_config(const ScenarioConfig& config) {
  json j;
  j["params"] = params_to_json(config.params);
  j["grid_points"] = config.grid_points;
  j["dt_ratio"] = config.dt_ratio;
  if (config.dt > 0.0) j["dt"] = config.dt;
  j["T"] = config.T;
  j["inflow"] = {{"type", config.inflow.type},
                 {"amplitude", config.inflow.amplitude},
                 {"species", config.inflow.species}};
  j["u0"] = config.u0;
  j["v0"] = config.v0;
  json r;
  r["type"] = config.r0.type;
  if (config.r0.type == "constant") r["value"] = config.r0.value;
  if (config.r0.type == "bumps") {
    r["r_c"] = config.r0.r_c;
    r["r_1"] = config.r0.r_1;
    r["c"] = config.r0.c;
  }
  if (config.r0.type == "file") r["file"] = config.r0.file;
  j["r0"] = r;
  j["snapshot_times"] = config.snapshot_times;
  j["emit_svg"] = config.emit_svg;
  j["scheme"] = config.scheme;
  j["picard_tol"] = config.picard_tol;
  j["picard_max_iter"] = config.picard_max_iter;
  j["monitor_policy"] = config.monitor_policy;
  if (!config.table_path.empty()) j["table_path"] = config.table_path;
  return j.dump(2) + "\n";
}

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c.params = params_from_json(j.at("params"));
    c.grid_points = j.value("grid_points", 41);
    c.dt_ratio = j.value("dt_ratio", 0.2);
    c.dt = j.value("dt", 0.0);
    c.T = j.value("T", 3.0);
    if (j.contains("inflow")) {
      const json& in = j.at("inflow");
      c.inflow.type = in.value("type", "zero");
      c.inflow.amplitude = in.value("amplitude", 0.0);
      c.inflow.species = in.value("species", 1);
    }
    c.u0 = j.at("u0").get<std::vector<double>>();
    c.v0 = j.value("v0", 0.0);
    if (j.contains("r0")) {
      const json& r = j.at("r0");
      c.r0.type = r.value("type", "constant");
      c.r0.value = r.value("value", 0.1);
      c.r0.r_c = r.value("r_c", 0.05);
      c.r0.r_1 = r.value("r_1", 0.35);
      c.r0.c = r.value("c", 60.0);
      c.r0.file = r.value("file", "");
    }
    c.snapshot_times = j.value("snapshot_times", std::vector<double>{});
    c.emit_svg = j.value("emit_svg", false);
    c.scheme = j.value("scheme", "explicit");
    c.picard_tol = j.value("picard_tol", 1e-9);
    c.picard_max_iter = j.value("picard_max_iter", 50);
    c.monitor_policy = j.value("monitor_policy", "warn");
    c.table_path = j.value("table_path", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

std::vector<double> initial_radius_field(const ScenarioConfig& config) {
  const int n = config.grid_points;
  const double dx = 1.0 / (n - 1);
  std::vector<double> r(static_cast<size_t>(n) * n);
  if (config.r0.type == "constant") {
    std::fill(r.begin(), r.end(), config.r0.value);
  } else if (config.r0.type == "bumps") {
    for (int l2 = 0; l2 < n; ++l2) {
      const double x2 = l2 * dx;
      for (int l1 = 0; l1 < n; ++l1) {
        const double x1 = l1 * dx;
        auto bump = [&](double cx, double cy) {
          return config.r0.r_1 *
                 std::exp(-config.r0.c * (x1 - cx) * (x1 - cx) -
                          config.r0.c * (x2 - cy) * (x2 - cy));
        };
        r[l2 * n + l1] = config.r0.r_c + bump(0.2, 0.2) + bump(0.8, 0.8);
      }
    }
  } else if (config.r0.type == "file") {
    const FieldCsv field = read_field_csv(config.r0.file);
    if (field.n != n)
      throw ConfigError("radius field file resolution does not match the grid");
    r = field.values;
  } else {
    throw ConfigError("unknown initial radius type: " + config.r0.type);
  }
  for (const double v : r)
    if (!(v > 0.0 && v < 0.5))
      throw ConfigError("initial radius field leaves (0, 1/2)");
  return r;
}

BoundaryConfig make_boundary(const ScenarioConfig& config) {
  BoundaryConfig bc;
  const InflowSpec in = config.inflow;
  if (in.type == "zero" || in.amplitude == 0.0) return bc;
  const int target = in.species - 1;
  if (in.type == "parabolic") {
    bc.inflow_profile = [in, target](int species, double x1) {
      return species == target ? in.amplitude * x1 * (1.0 - x1) : 0.0;
    };
  } else if (in.type == "parabolic-literal") {
    // species index inside the profile: amplitude * x1 * (i - x1), 1-based i
    bc.inflow_profile = [in, target](int species, double x1) {
      return species == target ? in.amplitude * x1 * (in.species - x1) : 0.0;
    };
  } else if (in.type == "constant") {
    bc.inflow_profile = [in, target](int species, double) {
      return species == target ? in.amplitude : 0.0;
    };
  } else {
    throw ConfigError("unknown inflow type: " + in.type);
  }
  return bc;
}

MacroState initial_state(const ScenarioConfig& config) {
  return make_uniform_state(config.grid_points, config.u0, config.v0,
                            initial_radius_field(config));
}

AnalysisBox make_analysis_box(const ScenarioConfig& config) {
  const std::vector<double> r = initial_radius_field(config);
  AnalysisBox box;
  box.sup_r0 = *std::max_element(r.begin(), r.end());
  box.inf_r0 = *std::min_element(r.begin(), r.end());
  box.sup_v0 = config.v0;
  box.a_sum = config.params.a_sum();
  box.b = config.params.beta_sum();

  // concentration budget: initial data plus the Robin equilibrium level
  // u = u^b / b_r reachable at the inflow edge, with headroom
  double u_top = config.u0.empty() ? 0.0
                                   : *std::max_element(config.u0.begin(),
                                                       config.u0.end());
  double inflow_peak = 0.0;
  if (config.inflow.type == "parabolic")
    inflow_peak = 0.25 * std::abs(config.inflow.amplitude);
  else if (config.inflow.type == "parabolic-literal")
    inflow_peak = std::abs(config.inflow.amplitude) * config.inflow.species;
  else if (config.inflow.type == "constant")
    inflow_peak = std::abs(config.inflow.amplitude);
  if (config.params.b_r > 0.0)
    u_top = std::max(u_top, inflow_peak / config.params.b_r);
  box.M = 2.0 * std::max(u_top, 1.0);

  box.eps1 = 0.5 * (1.0 - 2.0 * box.sup_r0);
  box.eps2 = 0.5 * box.inf_r0;
  try {
    box.s_max = feasible_horizon(box, config.params.alpha_r);
  } catch (const std::invalid_argument&) {
    box.s_max = 0.0;  // margins too tight: corridor check disabled
  }
  return box;
}

void write_field_csv(const std::string& path, const std::vector<double>& field,
                     int n, double t, const std::string& name) {
  if (static_cast<int>(field.size()) != n * n)
    throw std::invalid_argument("field size does not match the grid");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open snapshot file for writing: " + path);
  out << "# t=" << format_double(t) << " field=" << name << " n=" << n << "\n";
  for (int l2 = 0; l2 < n; ++l2) {
    for (int l1 = 0; l1 < n; ++l1) {
      if (l1) out << ',';
      out << format_double(field[l2 * n + l1]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

FieldCsv read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open snapshot file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty snapshot file: " + path);
  FieldCsv field;
  {
    char name_buf[128] = {0};
    if (std::sscanf(header.c_str(), "# t=%lg field=%127s n=%d", &field.t, name_buf,
                    &field.n) != 3) {
      // field name may contain the n= part if sscanf greedily matched; retry
      const size_t npos = header.rfind(" n=");
      if (npos == std::string::npos)
        throw IoError("malformed snapshot header: " + header);
      field.n = std::atoi(header.c_str() + npos + 3);
      std::string tmp(name_buf);
      const size_t cut = tmp.find(" n=");
      if (cut != std::string::npos) tmp.resize(cut);
      field.name = tmp;
    } else {
      field.name = name_buf;
    }
  }
  if (field.n < 1) throw IoError("malformed snapshot header: " + header);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) field.values.push_back(std::stod(cell));
  }
  if (static_cast<int>(field.values.size()) != field.n * field.n)
    throw IoError("snapshot value count does not match header: " + path);
  return field;
}

void render_heatmap(const std::vector<double>& field, int n,
                    const std::string& palette, const std::string& path) {
  if (static_cast<int>(field.size()) != n * n)
    throw std::invalid_argument("field size does not match the grid");
  if (palette != "heat" && palette != "gray")
    throw std::invalid_argument("unknown palette: " + palette);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const double v : field) {
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite value in field to render");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  const int cell = 10;
  const int size = n * cell;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open image file for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
      << "\" height=\"" << size + 20 << "\">\n";
  for (int l2 = 0; l2 < n; ++l2) {
    for (int l1 = 0; l1 < n; ++l1) {
      const double v = field[l2 * n + l1];
      const double t = span > 0.0 ? (v - lo) / span : 0.0;
      int r, g, b;
      if (palette == "heat") {
        r = g = static_cast<int>(std::lround(255.0 * t));
        b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      } else {
        r = g = b = static_cast<int>(std::lround(255.0 * t));
      }
      // row 0 is the x2=0 edge; draw it at the bottom
      const int y = (n - 1 - l2) * cell;
      out << "<rect x=\"" << l1 * cell << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << r << ',' << g << ','
          << b << ")\"/>\n";
    }
  }
  out << "<text x=\"2\" y=\"" << size + 14 << "\" font-size=\"12\">min="
      << format_double(lo) << " max=" << format_double(hi) << "</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

namespace {

void write_snapshots(const MacroState& state, const ScenarioConfig& config,
                     const std::string& out_dir, double t_label) {
  const int n = config.grid_points;
  std::ostringstream stamp;
  stamp << "t" << t_label;
  for (int i = 0; i < config.params.N; ++i) {
    const std::string name = "u" + std::to_string(i + 1);
    write_field_csv(out_dir + "/" + name + "_" + stamp.str() + ".csv", state.U[i],
                    n, state.t, name);
  }
  write_field_csv(out_dir + "/v_" + stamp.str() + ".csv", state.V, n, state.t, "v");
  write_field_csv(out_dir + "/r_" + stamp.str() + ".csv", state.R, n, state.t, "r");
  if (config.emit_svg)
    render_heatmap(state.R, n, "heat", out_dir + "/r_" + stamp.str() + ".svg");
}

void write_diag_header(std::ofstream& diag, int N) {
  diag << "t";
  for (int i = 1; i <= N; ++i) diag << ",u" << i << "_min,u" << i << "_max";
  diag << ",r_min,r_max,clogged_fraction,moment_total,max_r_increment,"
          "picard_iterations,linf_violation,corridor_violation,spd_violation\n";
}

void write_diag_row(std::ofstream& diag, const DiagnosticsRecord& rec) {
  diag << format_double(rec.t);
  for (size_t i = 0; i < rec.u_min.size(); ++i)
    diag << ',' << format_double(rec.u_min[i]) << ','
         << format_double(rec.u_max[i]);
  diag << ',' << format_double(rec.r_min) << ',' << format_double(rec.r_max)
       << ',' << format_double(rec.clogged_fraction) << ','
       << format_double(rec.moment_total) << ','
       << format_double(rec.max_r_increment) << ',' << rec.picard_iterations
       << ',' << rec.linf_violation << ',' << rec.radius_corridor_violation
       << ',' << rec.spd_violation << '\n';
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& config, const TortuosityTable& table,
                        const std::string& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  const double dt = config.time_step();
  GridSpec grid{config.grid_points, dt, config.T};
  const BoundaryConfig bc = make_boundary(config);
  const AnalysisBox box = make_analysis_box(config);

  if (config.scheme == "explicit") {
    const double guard = stability_guard(grid, config.params, table);
    if (dt > guard) {
      std::ostringstream msg;
      msg << "time step " << dt << " exceeds the stability guard " << guard
          << " (refusing to start in explicit mode)";
      throw NumericsError(msg.str());
    }
  }

  MacroState state = initial_state(config);

  std::ofstream diag(out_dir + "/diagnostics.csv");
  if (!diag) throw IoError("cannot open diagnostics file in " + out_dir);
  write_diag_header(diag, config.params.N);

  std::vector<double> pending = config.snapshot_times;
  std::sort(pending.begin(), pending.end());
  size_t next_snap = 0;
  while (next_snap < pending.size() && pending[next_snap] <= kSnapTol) {
    write_snapshots(state, config, out_dir, pending[next_snap]);
    ++next_snap;
  }

  const auto wall_start = std::chrono::steady_clock::now();
  RunSummary summary;
  const int steps = static_cast<int>(std::llround(config.T / dt));
  for (int s = 0; s < steps; ++s) {
    const std::vector<double> r_before = state.R;
    int picard_iters = 0;
    if (config.scheme == "picard") {
      PicardResult result = step_picard(state, config.params, grid, table, bc,
                                        config.picard_tol, config.picard_max_iter);
      state = std::move(result.state);
      picard_iters = result.iterations;
    } else {
      state = step_explicit(state, config.params, grid, table, bc);
    }
    ++summary.steps;
    summary.max_picard_iterations =
        std::max(summary.max_picard_iterations, picard_iters);

    DiagnosticsRecord rec = monitor_step(state, config.params, box, table);
    rec.picard_iterations = picard_iters;
    for (size_t c = 0; c < state.R.size(); ++c)
      rec.max_r_increment =
          std::max(rec.max_r_increment, std::abs(state.R[c] - r_before[c]));
    if (rec.any_violation()) ++summary.monitor_violations;
    write_diag_row(diag, rec);
    if (rec.any_violation() && config.monitor_policy == "abort")
      throw NumericsError("invariant monitor violation at t=" +
                          format_double(rec.t));

    while (next_snap < pending.size() &&
           state.t >= pending[next_snap] - 0.5 * dt) {
      write_snapshots(state, config, out_dir, pending[next_snap]);
      ++next_snap;
    }
  }
  // flush any trailing snapshot times (e.g. exactly T with rounding)
  while (next_snap < pending.size()) {
    write_snapshots(state, config, out_dir, pending[next_snap]);
    ++next_snap;
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
          .count();
  summary.max_radius = *std::max_element(state.R.begin(), state.R.end());
  int clogged = 0;
  for (const auto f : state.clogged) clogged += f;
  summary.clogged_fraction =
      static_cast<double>(clogged) / static_cast<double>(state.R.size());
  return summary;
}

}  // namespace clogsim
