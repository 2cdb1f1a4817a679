#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hybrid/identities.hpp"
#include "hybrid/scenario.hpp"

namespace {

int write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    fmt::print(stderr, "error: cannot write '{}'\n", path.string());
    return 1;
  }
  return 0;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            unsigned seed, int threads) {
  std::ifstream in(scenario_path, std::ios::binary);
  if (!in) {
    fmt::print(stderr, "error: cannot open '{}'\n", scenario_path);
    return 2;
  }
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};

  hybrid::ResultBundle result;
  try {
    const hybrid::Scenario scenario = hybrid::parse_scenario(text);
    result = hybrid::run_scenario(scenario, seed, threads);
  } catch (const hybrid::ScenarioError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }

  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fmt::print(stderr, "error: cannot create '{}': {}\n", out_dir,
               ec.message());
    return 1;
  }
  for (const int rc :
       {write_file(dir / "results.json", hybrid::results_to_json(result)),
        write_file(dir / "bounds.csv", hybrid::bounds_csv(result)),
        write_file(dir / "spreads.csv", hybrid::spreads_csv(result))}) {
    if (rc != 0) return rc;
  }

  int passed = 0;
  int failed = 0;
  int inapplicable = 0;
  for (const hybrid::BoundRow& row : result.bounds) {
    if (row.verdict == "pass") {
      ++passed;
    } else if (row.verdict == "fail") {
      ++failed;
    } else {
      ++inapplicable;
    }
  }
  fmt::print("classicality: {}\n", result.classicality_pass ? "pass" : "FAIL");
  fmt::print("verdicts: {} pass, {} fail, {} inapplicable\n", passed, failed,
             inapplicable);
  fmt::print("converged: {} (max probability drift {:.3e})\n",
             result.converged ? "yes" : "NO", result.max_probability_drift);
  for (const std::string& w : result.warnings) {
    fmt::print("warning: {}\n", w);
  }
  fmt::print("results written to {}\n", dir.string());
  fmt::print("overall: {}\n", result.all_pass ? "PASS" : "FAIL");
  return result.all_pass ? 0 : 1;
}

int cmd_check_identities(unsigned seed, int trials) {
  if (trials < 1) {
    fmt::print(stderr, "error: --trials must be at least 1\n");
    return 2;
  }
  const hybrid::IdentityReport report =
      hybrid::run_identity_checks(seed, trials);
  fmt::print("seed {}, {} trials\n", report.seed, report.trials);
  for (const hybrid::IdentityCheck& check : report.checks) {
    fmt::print("{:<26} max residual {:.3e}  threshold {:.0e}  {}\n",
               check.name, check.max_residual, check.threshold,
               check.pass ? "ok" : "FAIL");
  }
  fmt::print("overall: {}\n", report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

int cmd_example(const std::string& name, const std::string& out_file) {
  std::string text;
  try {
    text = hybrid::scenario_to_json(hybrid::example_scenario(name));
  } catch (const hybrid::ScenarioError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  if (out_file.empty()) {
    fmt::print("{}", text);
    return 0;
  }
  return write_file(out_file, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid classical-quantum scenario runner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  unsigned run_seed = 0;
  int threads = 1;
  CLI::App* run = app.add_subcommand(
      "run", "Execute a scenario file and write result artifacts");
  run->add_option("scenario", scenario_path, "Scenario JSON document")
      ->required();
  run->add_option("--out", out_dir,
                  "Directory for results.json, bounds.csv, spreads.csv")
      ->required();
  run->add_option("--threads", threads, "Worker threads for grid evaluation");
  run->add_option("--seed", run_seed, "Label recorded in the result bundle");

  unsigned id_seed = 0;
  int trials = 200;
  CLI::App* check = app.add_subcommand(
      "check-identities", "Randomized sweep over the algebra laws");
  check->add_option("--seed", id_seed, "Random seed");
  check->add_option("--trials", trials, "Trials per law");

  std::string example_name;
  std::string example_out;
  CLI::App* example =
      app.add_subcommand("example", "Emit a bundled scenario document");
  example->add_option("--name", example_name, "Scenario name")->required();
  example->add_option("--out", example_out,
                      "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (run->parsed()) return cmd_run(scenario_path, out_dir, run_seed, threads);
  if (check->parsed()) return cmd_check_identities(id_seed, trials);
  return cmd_example(example_name, example_out);
}
