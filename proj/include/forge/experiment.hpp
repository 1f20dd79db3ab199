#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "forge/io.hpp"

namespace forge {

/// Uniform random spanning tree (random Prüfer sequence) plus distinct extra
/// edges drawn uniformly until there are m_target edges. Deterministic per
/// seed. Domain error unless n >= 2 and n-1 <= m_target <= n(n-1)/2.
Graph gen_random_graph(int n, int m_target, std::uint64_t seed);

/// One run of the CLI. graph, X, S and P hold inline JSON; from_json also
/// accepts file names for them, resolved against the config's directory.
struct ExperimentConfig {
  std::string command;

  // Generated graphs; from_json switches to 7 / 11 for game and prevent.
  int n = 14;
  int m = 28;  // the initial edges for design
  std::optional<json> graph;

  // design
  int k = 25;
  std::vector<std::string> strategies{"greedy", "hull", "sdp"};
  std::optional<json> X;

  // game / prevent
  int k_s = 5;
  std::optional<json> S;
  std::optional<json> P;
  double p_lower = 0.25;
  double p_upper = 0.75;
  std::optional<double> p_budget = 4.25;
  int T = 30;
  std::vector<std::string> algorithms{"rand", "cvx", "search"};
  WeightingScheme weighting;

  std::vector<std::uint64_t> seeds{1};
  SolverSettings solver;
  double compare_tol = 1e-6;
  std::string out_dir = "out";

  /// Unknown keys and wrongly typed values raise config errors.
  static ExperimentConfig from_json(const json& j, const std::string& command, const std::string& base_dir = ".");
  /// Checks ranges and names; config error otherwise.
  void validate() const;
};

/// FORGE_THREADS if set (config error unless a positive integer), else the
/// hardware concurrency.
int thread_limit();

struct SeedFailure {
  std::uint64_t seed = 0;
  std::exception_ptr error;
};

struct DesignSeedReport {
  std::uint64_t seed = 0;
  DesignProblem problem;
  std::vector<DesignResult> results;  // in cfg.strategies order
};

struct DesignReport {
  std::vector<DesignSeedReport> seeds;  // sorted by seed
  std::vector<SeedFailure> failures;    // sorted by seed
  json summary;
};

struct PreventionSeedReport {
  std::uint64_t seed = 0;
  GameInstance instance;
  GameValue oracle;
  std::vector<PlayTrace> traces;  // in cfg.algorithms order
  /// alpha(s_star, solve_p3(s_star)) per trace: the attacker re-responds to
  /// the committed play.
  std::vector<double> rechallenged;
};

struct PreventionReport {
  std::vector<PreventionSeedReport> seeds;
  std::vector<SeedFailure> failures;
  json summary;
};

struct GameSeedReport {
  std::uint64_t seed = 0;
  GameInstance instance;
  GameValue value;
  bool nash = false;
  bool deterministic = false;
};

struct GameReport {
  std::vector<GameSeedReport> seeds;
  std::vector<SeedFailure> failures;
};

DesignProblem build_design_problem(const ExperimentConfig& cfg, std::uint64_t seed);
GameInstance build_game_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every strategy on identical instances per seed and counts wins.
DesignReport run_design_comparison(const ExperimentConfig& cfg);
/// Runs the preventive oracle and every algorithm per seed.
PreventionReport run_prevention_comparison(const ExperimentConfig& cfg);
/// Preventive value, Nash check and deterministic connectivity per seed.
GameReport run_game(const ExperimentConfig& cfg);

/// Writers emit the successful seeds, then rethrow the first failure.
void write_design_report(const DesignReport& report, const ExperimentConfig& cfg);
void write_prevention_report(const PreventionReport& report, const ExperimentConfig& cfg);
void write_game_report(const GameReport& report, const ExperimentConfig& cfg);
/// Writes graph_seed<N>.json per seed.
void write_generated_graphs(const ExperimentConfig& cfg);

}  // namespace forge
