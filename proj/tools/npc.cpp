// npc: run, check, refine and report on harmonic-map scenarios.
//
// Exit status: 0 when every non-diagnostic report passes, 1 when some such
// report fails, 2 on invalid input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "npc/scenario.hpp"

namespace fs = std::filesystem;
using namespace npc;

namespace {

constexpr int kGateFailure = 1;
constexpr int kBadInput = 2;

struct CalibrationFlags {
  std::string path;
  bool disabled = false;
};

void add_calibration_flags(CLI::App* cmd, CalibrationFlags& flags) {
  cmd->add_option("--calibration", flags.path, "Frozen constants (default: the repository's data/calibration.json)");
  cmd->add_flag("--no-calibration", flags.disabled, "Ignore frozen constants");
}

// Missing default file is not an error: frozen comparisons are then skipped.
std::optional<Calibration> resolve_calibration(const CalibrationFlags& flags) {
  if (flags.disabled) return std::nullopt;
  if (!flags.path.empty()) return load_calibration(flags.path);
  const std::string fallback = default_calibration_path();
  if (fs::exists(fallback)) return load_calibration(fallback);
  return std::nullopt;
}

nlohmann::json reports_json(const std::vector<CheckReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckReport& r : reports) arr.push_back(to_json(r));
  return arr;
}

void print_summary(const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports)
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << " [" << to_string(r.gate) << "] max_violation=" << r.max_violation
              << " tolerance=" << r.tolerance << "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

int gate_status(const std::vector<CheckReport>& reports) { return all_hard_gates_pass(reports) ? 0 : kGateFailure; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete harmonic maps into CAT(0) targets: solve scenarios and check regularity estimates"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, format = "json", input, check_name, check_options = "{}";
  CalibrationFlags cal_flags;
  int levels = 3;
  double margin = 1.5;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  CLI::App* run = app.add_subcommand("run", "Solve a scenario and run its checks");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory for reports.json, reports.csv, energy.csv and solution.json")
      ->required();
  add_calibration_flags(run, cal_flags);

  CLI::App* check = app.add_subcommand("check", "Run one named check on a solved scenario");
  check->add_option("name", check_name, "Check name")->required()->check(CLI::IsMember(known_checks()));
  check->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  check->add_option("--options", check_options, "Per-check options as a JSON object");
  add_calibration_flags(check, cal_flags);

  CLI::App* refine_cmd = app.add_subcommand("refine", "Refinement study over the scenario's mesh spacings");
  refine_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--levels", levels, "Number of refinement levels")->check(CLI::PositiveNumber);
  refine_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  CLI::App* report = app.add_subcommand("report", "Re-emit stored reports as JSON or CSV");
  report->add_option("--in", input, "reports.json written by `npc run`")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "Fit and write frozen constants");
  calibrate_cmd->add_option("--out", out_dir, "Calibration JSON to write")->required();
  calibrate_cmd->add_option("--seeds", seeds, "Calibration seeds");
  calibrate_cmd->add_option("--margin", margin, "Factor applied to the fitted maxima");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kBadInput;
  }

  try {
    if (run->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const auto cal = resolve_calibration(cal_flags);
      const SolvedScenario solved = solve_scenario(s);
      if (!solved.solve.converged) std::cerr << "warning: solver stopped at residual " << solved.solve.residual << "\n";
      const std::vector<CheckReport> reports = run_checks(solved, cal ? &*cal : nullptr);
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "reports.json", reports_json(reports).dump(2) + "\n");
      std::ostringstream csv;
      write_reports_csv(csv, reports);
      write_file(fs::path(out_dir) / "reports.csv", csv.str());
      std::ostringstream energy;
      write_energy_csv(energy, energy_density(*solved.graph, solved.solve.u, solved.region,
                                              energy_scales(*solved.graph, s.options)));
      write_file(fs::path(out_dir) / "energy.csv", energy.str());
      write_file(fs::path(out_dir) / "solution.json", to_json(solved.solve).dump() + "\n");
      print_summary(reports);
      return gate_status(reports);
    }
    if (check->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const auto cal = resolve_calibration(cal_flags);
      const SolvedScenario solved = solve_scenario(s);
      const CheckReport r = run_check(solved, {check_name, nlohmann::json::parse(check_options)}, cal ? &*cal : nullptr);
      std::cout << to_json(r).dump(2) << "\n";
      print_summary({r});
      return gate_status({r});
    }
    if (refine_cmd->parsed()) {
      const RefinementStudy study = refine(load_scenario(scenario_path), levels);
      if (format == "csv") write_refinement_csv(std::cout, study);
      else std::cout << to_json(study).dump(2) << "\n";
      print_summary(study.trends);
      return gate_status(study.trends);
    }
    if (report->parsed()) {
      std::ifstream in(input);
      const nlohmann::json j = nlohmann::json::parse(in);
      if (!j.is_array()) throw InvalidArgument("report: expected an array of reports");
      std::vector<CheckReport> reports;
      for (const auto& r : j) reports.push_back(report_from_json(r));
      if (format == "csv") write_reports_csv(std::cout, reports);
      else std::cout << reports_json(reports).dump(2) << "\n";
      return gate_status(reports);
    }
    if (calibrate_cmd->parsed()) {
      const Calibration cal = calibrate(calibration_suite(), seeds, margin);
      const fs::path out(out_dir);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_file(out, to_json(cal).dump(2) + "\n");
      std::cerr << "wrote " << out.string() << "\n";
      return 0;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
