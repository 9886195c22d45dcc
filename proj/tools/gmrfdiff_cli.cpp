// Command-line front end: simulate, analyze, preset and sweep.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/presets.hpp"
#include "gmrfdiff/report.hpp"
#include "gmrfdiff/runner.hpp"
#include "gmrfdiff/scenario.hpp"

namespace {

using namespace gmrfdiff;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnstable = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> jobs;
  std::string format = "csv";

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--runs", runs, "Number of Monte Carlo runs");
    cmd->add_option("--iters", iters, "Iterations per run");
    cmd->add_option("--jobs", jobs, "Worker threads");
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  }

  void apply(Scenario& s) const {
    if (seed) s.seed = *seed;
    if (runs) s.runs = *runs;
    if (iters) s.iters = *iters;
    if (jobs) s.jobs = *jobs;
    s.validate();
  }
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values: cannot parse '" + item + "'");
    }
  }
  return values;
}

void emit(const Table& table, OutputFormat format, const std::string& path) {
  if (path.empty() || path == "-") {
    write_table(std::cout, table, format);
  } else {
    write_table_file(path, table, format);
  }
}

void summarize(const RunResult& result) {
  std::cerr << "scenario " << result.scenario << ": seed " << result.master_seed << ", " << result.runs << " runs x "
            << result.iters << " iterations, " << format_number(result.wall_seconds) << " s\n";
  for (const auto& a : result.algorithms) {
    std::cerr << "  " << a.label << ": steady MSD " << format_number(steady_msd_db(result, a)) << " dB";
    if (!a.diverged_runs.empty()) std::cerr << ", diverged in " << a.diverged_runs.size() << " run(s)";
    std::cerr << '\n';
  }
}

std::string extension(OutputFormat format) { return format == OutputFormat::csv ? ".csv" : ".json"; }

int run(int argc, char** argv) {
  CLI::App app{"Diffusion adaptation over GMRF-correlated sensor networks"};
  app.require_subcommand(1);

  Overrides simulate_ov, analyze_ov, preset_ov, sweep_ov;
  std::string scenario_path, out_path, comm_path, preset_name, out_dir = ".", axis_name, values_text;
  bool desk = false;
  bool dump = false;

  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo simulation of a scenario");
  simulate->add_option("scenario", scenario_path, "Scenario file (YAML, or JSON by extension)")->required();
  simulate->add_option("--out", out_path, "Output file (default: stdout)");
  simulate->add_option("--comm", comm_path, "Also write per-iteration communication counts here");
  simulate_ov.attach(simulate);

  auto* analyze = app.add_subcommand("analyze", "Evaluate the mean and mean-square theory of a scenario");
  analyze->add_option("scenario", scenario_path, "Scenario file")->required();
  analyze->add_option("--out", out_path, "Output file (default: stdout)");
  analyze_ov.attach(analyze);

  auto* preset_cmd = app.add_subcommand("preset", "Run one of the built-in experiments");
  preset_cmd->add_option("name", preset_name, "Preset name")->required()->check(CLI::IsMember(preset_names()));
  preset_cmd->add_flag("--desk", desk, "Reduced-scale variant");
  preset_cmd->add_option("--out", out_dir, "Output directory");
  preset_cmd->add_flag("--dump", dump, "Print the preset's scenario document and exit");
  preset_ov.attach(preset_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Steady-state MSD across values of one parameter");
  sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--axis", axis_name, "nu, kappa, support_size, gamma or step_size")->required();
  sweep_cmd->add_option("--values", values_text, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  sweep_ov.attach(sweep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*simulate) {
    Scenario s = load_scenario(scenario_path);
    simulate_ov.apply(s);
    const ResolvedScenario r = resolve(s);
    const RunResult result = run_scenario(r);
    const OutputFormat format = parse_format(simulate_ov.format);
    emit(primary_table(r, result), format, out_path);
    if (!comm_path.empty()) write_table_file(comm_path, comm_table(result), format);
    summarize(result);
  } else if (*analyze) {
    Scenario s = load_scenario(scenario_path);
    analyze_ov.apply(s);
    emit(theory_table(resolve(s)), parse_format(analyze_ov.format), out_path);
  } else if (*preset_cmd) {
    if (dump) {
      std::cout << preset_document(preset_name, desk) << '\n';
      return kExitOk;
    }
    PresetPlan plan = preset_plan(preset_name, desk);
    preset_ov.apply(plan.scenario);
    const OutputFormat format = parse_format(preset_ov.format);
    std::filesystem::create_directories(out_dir);
    const std::string stem = (std::filesystem::path(out_dir) / plan.scenario.name).string();
    if (plan.mode == PresetMode::simulate) {
      const ResolvedScenario r = resolve(plan.scenario);
      const RunResult result = run_scenario(r);
      write_table_file(stem + extension(format), primary_table(r, result), format);
      if (plan.scenario.output == OutputKind::curves) {
        write_table_file(stem + "_comm" + extension(format), comm_table(result), format);
      }
      summarize(result);
    } else if (plan.mode == PresetMode::sweep) {
      write_table_file(stem + extension(format), sweep_table(sweep(plan.scenario, plan.axis, plan.values)), format);
    } else {
      const auto rows =
          gain_sweep(plan.scenario, plan.aware_label, plan.agnostic_label, plan.values, plan.kappa_values);
      write_table_file(stem + extension(format), sweep_table(rows), format);
    }
    if (!plan.scenario.note.empty()) std::cerr << "note: " << plan.scenario.note << '\n';
    std::cerr << "wrote " << stem << extension(format) << '\n';
  } else if (*sweep_cmd) {
    Scenario s = load_scenario(scenario_path);
    sweep_ov.apply(s);
    const SweepAxis axis = parse_axis(axis_name);
    emit(sweep_table(sweep(s, axis, parse_values(values_text))), parse_format(sweep_ov.format), out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gmrfdiff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gmrfdiff::UnknownPreset& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gmrfdiff::Unstable& e) {
    std::cerr << "unstable: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const gmrfdiff::Diverged& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
