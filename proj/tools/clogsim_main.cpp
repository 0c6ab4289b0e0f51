#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "clogsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const clogsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const clogsim::NumericsError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clogsim::SolverError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clogsim::MeshError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clogsim::TableError& e) {
    std::cerr << "table error: " << e.what() << "\n";
    return kExitIo;
  } catch (const clogsim::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-scale colloid transport and pore clogging simulator"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build-table",
                                   "solve the cell problems over a radius sweep");
  double r_min = 0.05, dr = 0.01;
  int ntheta = 64, nrho = 24;
  std::string table_out = "tau.table";
  build->add_option("--r-min", r_min, "smallest radius in the sweep");
  build->add_option("--dr", dr, "radius increment");
  build->add_option("--ntheta", ntheta, "angular mesh resolution (multiple of 8)");
  build->add_option("--nrho", nrho, "radial mesh resolution");
  build->add_option("--out", table_out, "output table path")->required();

  auto* run = app.add_subcommand("run", "run a scenario");
  std::string config_path, table_path, out_dir = ".", scheme, monitor;
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--table", table_path, "tortuosity table")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--scheme", scheme, "explicit|picard (overrides config)");
  run->add_option("--monitor", monitor, "warn|abort (overrides config)");

  auto* preset = app.add_subcommand("preset", "dump a built-in scenario config");
  std::string preset_name, preset_dump;
  preset->add_option("--name", preset_name, "uniform|bumps")->required();
  preset->add_option("--dump", preset_dump, "write the config here (default stdout)")
      ->expected(0, 1);

  auto* validate = app.add_subcommand("validate", "re-check table invariants");
  std::string validate_table;
  validate->add_option("--table", validate_table, "table path")->required();

  auto* render = app.add_subcommand("render", "render a field snapshot as SVG");
  std::string field_csv, render_out, palette = "heat";
  render->add_option("--field-csv", field_csv, "snapshot CSV")->required();
  render->add_option("--out", render_out, "output SVG path")->required();
  render->add_option("--palette", palette, "heat|gray");

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) {
    return run_guarded([&] {
      const clogsim::TortuosityTable table =
          clogsim::build_table(r_min, dr, {ntheta, nrho});
      clogsim::save_table(table, table_out);
      std::printf("table: %zu radii written to %s\n", table.radii.size(),
                  table_out.c_str());
    });
  }
  if (run->parsed()) {
    return run_guarded([&] {
      clogsim::ScenarioConfig config = clogsim::load_config(config_path);
      if (!scheme.empty()) config.scheme = scheme;
      if (!monitor.empty()) config.monitor_policy = monitor;
      config.validate();
      const clogsim::TortuosityTable table = clogsim::load_table(table_path);
      const clogsim::RunSummary s =
          clogsim::run_scenario(config, table, out_dir);
      std::printf(
          "steps=%d wall=%.3fs max_radius=%.6f clogged_fraction=%.6f "
          "picard_max=%d monitor_violations=%d\n",
          s.steps, s.wall_seconds, s.max_radius, s.clogged_fraction,
          s.max_picard_iterations, s.monitor_violations);
    });
  }
  if (preset->parsed()) {
    return run_guarded([&] {
      clogsim::ScenarioConfig config;
      if (preset_name == "uniform")
        config = clogsim::preset_uniform();
      else if (preset_name == "bumps")
        config = clogsim::preset_bumps();
      else
        throw clogsim::ConfigError("unknown preset: " + preset_name);
      const std::string text = clogsim::serialize_config(config);
      if (preset_dump.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        FILE* f = std::fopen(preset_dump.c_str(), "w");
        if (!f) throw clogsim::IoError("cannot write " + preset_dump);
        std::fputs(text.c_str(), f);
        std::fclose(f);
      }
    });
  }
  if (validate->parsed()) {
    return run_guarded([&] {
      const clogsim::TortuosityTable table = clogsim::load_table(validate_table);
      std::printf("table ok: %zu radii, mesh %dx%d, clog anchor %s\n",
                  table.radii.size(), table.mesh_meta.n_theta,
                  table.mesh_meta.n_rho, table.clog_anchor ? "yes" : "no");
    });
  }
  if (render->parsed()) {
    return run_guarded([&] {
      const clogsim::FieldCsv field = clogsim::read_field_csv(field_csv);
      clogsim::render_heatmap(field.values, field.n, palette, render_out);
      std::printf("rendered %s (t=%g, %dx%d) to %s\n", field.name.c_str(), field.t,
                  field.n, field.n, render_out.c_str());
    });
  }
  return 0;
}
