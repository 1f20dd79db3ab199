// forge: experiment runner.
//   forge gen|design|game|prevent --config <file> [--seed N --k N --T N --out DIR]
// Exit codes: 0 ok, 2 config (also invalid instance data), 3 infeasible,
// 4 size cap, 5 solver, 1 anything unexpected.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "forge/error.hpp"
#include "forge/experiment.hpp"

namespace {

int exit_code(forge::ErrorKind kind) {
  switch (kind) {
    case forge::ErrorKind::config:
    case forge::ErrorKind::domain:
    case forge::ErrorKind::dimension:
    case forge::ErrorKind::unsupported: return 2;
    case forge::ErrorKind::infeasible: return 3;
    case forge::ErrorKind::size: return 4;
    case forge::ErrorKind::solver: return 5;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebraic connectivity design and preventive protection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k, T;
  std::optional<std::string> out;
  for (const char* name : {"gen", "design", "game", "prevent"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "single seed (replaces the config's seeds)");
    sub->add_option("--k", k, "edges to add (design)");
    sub->add_option("--T", T, "rounds per algorithm (prevent)");
    sub->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const std::filesystem::path path(config_path);
    const std::string base = path.has_parent_path() ? path.parent_path().string() : ".";
    forge::ExperimentConfig cfg = forge::ExperimentConfig::from_json(forge::read_json_file(config_path), command, base);
    if (seed) cfg.seeds = {*seed};
    if (k) cfg.k = *k;
    if (T) cfg.T = *T;
    if (out) cfg.out_dir = *out;
    cfg.validate();

    if (command == "gen") {
      forge::write_generated_graphs(cfg);
    } else if (command == "design") {
      forge::write_design_report(forge::run_design_comparison(cfg), cfg);
    } else if (command == "game") {
      forge::write_game_report(forge::run_game(cfg), cfg);
    } else {
      forge::write_prevention_report(forge::run_prevention_comparison(cfg), cfg);
    }
  } catch (const forge::Error& e) {
    std::cerr << "forge " << command << ": " << forge::to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "forge " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
