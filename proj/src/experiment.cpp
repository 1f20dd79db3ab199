#include "forge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <thread>

#include "forge/error.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

constexpr double kOracleTol = 1e-8;

// Runs fn for every seed (ascending, deduplicated) on up to thread_limit()
// threads. Results and failures come back in seed order.
template <class R, class F>
void for_each_seed(const std::vector<std::uint64_t>& input, F fn, std::vector<R>& done, std::vector<SeedFailure>& failed) {
  std::vector<std::uint64_t> seeds = input;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  std::vector<std::optional<R>> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i].emplace(fn(seeds[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(thread_limit()), seeds.size());
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (results[i])
      done.push_back(std::move(*results[i]));
    else
      failed.push_back({seeds[i], errors[i]});
  }
}

json resolve(const json& value, const std::string& base_dir) {
  if (!value.is_string()) return value;
  std::filesystem::path path(value.get<std::string>());
  if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
  return read_json_file(path.string());
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::config, "config key '" + key + "' has the wrong type");
  }
}

std::string seed_name(const std::string& prefix, std::uint64_t seed) {
  return prefix + "_seed" + std::to_string(seed);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void rethrow_first(const std::vector<SeedFailure>& failures) {
  if (!failures.empty()) std::rethrow_exception(failures.front().error);
}

json failures_json(const std::vector<SeedFailure>& failures) {
  json out = json::array();
  for (const SeedFailure& f : failures) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(f.error);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    out.push_back({{"seed", f.seed}, {"error", what}});
  }
  return out;
}

DesignResult run_strategy(const std::string& name, const DesignProblem& dp, const SolverSettings& settings) {
  if (name == "greedy") return greedy_fiedler(dp);
  if (name == "hull") return convex_hull_relax(dp, settings);
  if (name == "sdp") return sdp_relax(dp, settings);
  return brute_force_design(dp);
}

PlayTrace run_algorithm(const std::string& name, const GameInstance& gi, const ExperimentConfig& cfg, std::uint64_t seed) {
  const AttackerOracle attacker = best_response_attacker(gi);
  if (name == "rand") return alg_rand(gi, cfg.T, attacker, seed);
  if (name == "cvx") return alg_cvx(gi, cfg.T, cfg.weighting, attacker);
  return alg_search(gi, cfg.T, attacker);
}

json trace_params(const ExperimentConfig& cfg, const GameInstance& gi) {
  json params = {{"T", cfg.T}, {"n", gi.graph.num_nodes()}, {"m", gi.graph.num_edges()}};
  params["weighting"] = to_string(cfg.weighting.kind);
  if (cfg.weighting.kind == WeightKind::recency) params["gamma"] = cfg.weighting.gamma;
  return params;
}

}  // namespace

Graph gen_random_graph(int n, int m_target, std::uint64_t seed) {
  if (n < 2) fail(ErrorKind::domain, "random graph needs n >= 2");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  if (m_target < n - 1 || m_target > max_edges)
    fail(ErrorKind::domain, "m_target must lie in [n-1, n(n-1)/2]");
  Rng rng(mix_seed(seed, 0));

  std::vector<Edge> edges;
  if (n == 2) {
    edges.push_back({0, 1});
  } else {
    std::vector<int> code(static_cast<std::size_t>(n - 2));
    for (int& c : code) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int c : code) ++degree[c];
    // Decode: repeatedly join the smallest leaf to the next code entry.
    std::set<int> leaves;
    for (int i = 0; i < n; ++i)
      if (degree[i] == 1) leaves.insert(i);
    for (int c : code) {
      const int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.push_back({std::min(leaf, c), std::max(leaf, c)});
      if (--degree[c] == 1) leaves.insert(c);
    }
    const int a = *leaves.begin();
    const int b = *std::next(leaves.begin());
    edges.push_back({a, b});
  }

  std::set<Edge> used(edges.begin(), edges.end());
  std::vector<Edge> rest;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!used.count({u, v})) rest.push_back({u, v});
  // Partial Fisher-Yates over the non-tree pairs.
  const std::size_t extra = static_cast<std::size_t>(m_target - (n - 1));
  for (std::size_t i = 0; i < extra; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(rest.size() - i));
    std::swap(rest[i], rest[j]);
    edges.push_back(rest[i]);
  }
  return Graph(n, std::move(edges));
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& command, const std::string& base_dir) {
  if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  static const std::set<std::string> known = {
      "command", "n",        "m",       "graph",    "k",         "strategies", "X",           "k_s",
      "S",       "P",        "p_lower", "p_upper",  "p_budget",  "T",          "algorithms",  "weighting",
      "seeds",   "seed",     "solver",  "compare_tol", "out"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail(ErrorKind::config, "unknown config key '" + key + "'");

  ExperimentConfig cfg;
  cfg.command = command;
  if (command == "game" || command == "prevent") {
    cfg.n = 7;
    cfg.m = 11;
  }
  if (j.contains("command") && get<std::string>(j, "command") != command)
    fail(ErrorKind::config, "config is for command '" + get<std::string>(j, "command") + "', not '" + command + "'");
  if (j.contains("n")) cfg.n = get<int>(j, "n");
  if (j.contains("m")) cfg.m = get<int>(j, "m");
  if (j.contains("graph")) cfg.graph = resolve(j["graph"], base_dir);
  if (j.contains("k")) cfg.k = get<int>(j, "k");
  if (j.contains("strategies")) cfg.strategies = get<std::vector<std::string>>(j, "strategies");
  if (j.contains("X")) cfg.X = resolve(j["X"], base_dir);
  if (j.contains("k_s")) cfg.k_s = get<int>(j, "k_s");
  if (j.contains("S")) cfg.S = resolve(j["S"], base_dir);
  if (j.contains("P")) cfg.P = resolve(j["P"], base_dir);
  if (j.contains("p_lower")) cfg.p_lower = get<double>(j, "p_lower");
  if (j.contains("p_upper")) cfg.p_upper = get<double>(j, "p_upper");
  if (j.contains("p_budget")) {
    if (j["p_budget"].is_null())
      cfg.p_budget.reset();
    else
      cfg.p_budget = get<double>(j, "p_budget");
  }
  if (j.contains("T")) cfg.T = get<int>(j, "T");
  if (j.contains("algorithms")) cfg.algorithms = get<std::vector<std::string>>(j, "algorithms");
  if (j.contains("weighting")) {
    const json& w = j["weighting"];
    if (w.is_string()) {
      cfg.weighting.kind = parse_weight_kind(w.get<std::string>());
    } else if (w.is_object()) {
      if (w.contains("kind")) cfg.weighting.kind = parse_weight_kind(get<std::string>(w, "kind"));
      if (w.contains("gamma")) cfg.weighting.gamma = get<double>(w, "gamma");
    } else {
      fail(ErrorKind::config, "weighting must be a name or {\"kind\", \"gamma\"}");
    }
  }
  if (j.contains("seeds")) cfg.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("seed")) cfg.seeds = {get<std::uint64_t>(j, "seed")};
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) fail(ErrorKind::config, "solver must be an object");
    if (s.contains("tol")) cfg.solver.tol = get<double>(s, "tol");
    if (s.contains("max_iters")) cfg.solver.max_iters = get<int>(s, "max_iters");
  }
  if (j.contains("compare_tol")) cfg.compare_tol = get<double>(j, "compare_tol");
  if (j.contains("out")) cfg.out_dir = get<std::string>(j, "out");
  return cfg;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> commands = {"gen", "design", "game", "prevent"};
  static const std::set<std::string> strategy_names = {"greedy", "hull", "sdp", "brute"};
  static const std::set<std::string> algorithm_names = {"rand", "cvx", "search"};
  if (!commands.count(command)) fail(ErrorKind::config, "unknown command '" + command + "'");
  if (seeds.empty()) fail(ErrorKind::config, "seeds must not be empty");
  if (!graph) {
    if (n < 2) fail(ErrorKind::config, "n must be at least 2");
    if (m < n - 1 || static_cast<long long>(m) > static_cast<long long>(n) * (n - 1) / 2)
      fail(ErrorKind::config, "m must lie in [n-1, n(n-1)/2]");
  }
  if (k < 0) fail(ErrorKind::config, "k must be nonnegative");
  if (k_s < 0) fail(ErrorKind::config, "k_s must be nonnegative");
  if (T < 1) fail(ErrorKind::config, "T must be at least 1");
  for (const auto& s : strategies)
    if (!strategy_names.count(s)) fail(ErrorKind::config, "unknown strategy '" + s + "'");
  for (const auto& a : algorithms)
    if (!algorithm_names.count(a)) fail(ErrorKind::config, "unknown algorithm '" + a + "'");
  if (weighting.kind == WeightKind::recency && !(weighting.gamma > 0.0 && weighting.gamma < 1.0))
    fail(ErrorKind::config, "weighting gamma must lie in (0,1)");
  if (!(0.0 <= p_lower && p_lower <= p_upper && p_upper <= 1.0))
    fail(ErrorKind::config, "need 0 <= p_lower <= p_upper <= 1");
  if (solver.tol <= 0.0 || solver.max_iters < 1) fail(ErrorKind::config, "solver tol and max_iters must be positive");
  if (compare_tol < 0.0) fail(ErrorKind::config, "compare_tol must be nonnegative");
}

int thread_limit() {
  if (const char* env = std::getenv("FORGE_THREADS"); env && *env) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (*end != '\0' || value < 1) fail(ErrorKind::config, "FORGE_THREADS must be a positive integer");
    return static_cast<int>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

DesignProblem build_design_problem(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Graph initial = cfg.graph ? graph_from_json(*cfg.graph) : gen_random_graph(cfg.n, cfg.m, seed);
  Graph full = Graph::complete(initial.num_nodes());
  std::vector<int> e0;
  for (const Edge& e : initial.edges()) e0.push_back(*full.edge_index(e.u, e.v));
  LinearConstraintSet X =
      cfg.X ? constraints_from_json(*cfg.X, full) : LinearConstraintSet::box(full.num_edges(), 0.0, 1.0);
  return DesignProblem::make(std::move(full), std::move(e0), cfg.k, std::move(X));
}

GameInstance build_game_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  Graph g = cfg.graph ? graph_from_json(*cfg.graph) : gen_random_graph(cfg.n, cfg.m, seed);
  const int m = g.num_edges();
  LinearConstraintSet S =
      cfg.S ? constraints_from_json(*cfg.S, g) : LinearConstraintSet::box(m, 0.0, 1.0).with_budget(cfg.k_s);
  AttackerSet P;
  if (cfg.P) {
    P = attacker_from_json(*cfg.P, g);
  } else {
    LinearConstraintSet box = LinearConstraintSet::box(m, cfg.p_lower, cfg.p_upper);
    if (cfg.p_budget) box.with_budget(*cfg.p_budget);
    P = std::move(box);
  }
  return GameInstance::make(std::move(g), std::move(S), std::move(P));
}

DesignReport run_design_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  DesignReport report;
  for_each_seed<DesignSeedReport>(
      cfg.seeds,
      [&](std::uint64_t seed) {
        DesignSeedReport r;
        r.seed = seed;
        r.problem = build_design_problem(cfg, seed);
        for (const auto& name : cfg.strategies) r.results.push_back(run_strategy(name, r.problem, cfg.solver));
        return r;
      },
      report.seeds, report.failures);

  json comparisons = json::array();
  const std::size_t ns = cfg.strategies.size();
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = a + 1; b < ns; ++b) {
      int a_ge = 0, b_ge = 0, a_gt = 0, b_gt = 0;
      for (const auto& r : report.seeds) {
        const double fa = r.results[a].final_lambda2, fb = r.results[b].final_lambda2;
        a_ge += fa >= fb - cfg.compare_tol;
        b_ge += fb >= fa - cfg.compare_tol;
        a_gt += fa > fb + cfg.compare_tol;
        b_gt += fb > fa + cfg.compare_tol;
      }
      const std::string& na = cfg.strategies[a];
      const std::string& nb = cfg.strategies[b];
      comparisons.push_back({{"a", na}, {"b", nb}, {na + "_ge_" + nb, a_ge}, {nb + "_ge_" + na, b_ge},
                             {na + "_wins", a_gt}, {nb + "_wins", b_gt}, {"ties", static_cast<int>(report.seeds.size()) - a_gt - b_gt}});
    }
  json finals = json::array();
  for (const auto& r : report.seeds) {
    json row = {{"seed", r.seed}};
    for (std::size_t i = 0; i < ns; ++i) row[cfg.strategies[i]] = r.results[i].final_lambda2;
    finals.push_back(row);
  }
  report.summary = {{"k", cfg.k},
                    {"strategies", cfg.strategies},
                    {"seeds", static_cast<int>(report.seeds.size())},
                    {"compare_tol", cfg.compare_tol},
                    {"comparisons", comparisons},
                    {"final_lambda2", finals},
                    {"failures", failures_json(report.failures)}};
  return report;
}

PreventionReport run_prevention_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  PreventionReport report;
  for_each_seed<PreventionSeedReport>(
      cfg.seeds,
      [&](std::uint64_t seed) {
        PreventionSeedReport r;
        r.seed = seed;
        r.instance = build_game_instance(cfg, seed);
        r.oracle = preventive_oracle(r.instance);
        for (const auto& name : cfg.algorithms) {
          r.traces.push_back(run_algorithm(name, r.instance, cfg, seed));
          r.rechallenged.push_back(solve_p3(r.instance, r.traces.back().s_star).alpha);
        }
        return r;
      },
      report.seeds, report.failures);

  json per_algorithm = json::object();
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    int reached = 0, exceeded = 0, monotone = 0;
    for (const auto& r : report.seeds) {
      const PlayTrace& tr = r.traces[a];
      reached += tr.alpha_star >= r.oracle.alpha - kOracleTol;
      exceeded += tr.alpha_star > r.oracle.alpha + kOracleTol;
      const auto best = tr.best_so_far();
      monotone += std::is_sorted(best.begin(), best.end());
    }
    per_algorithm[cfg.algorithms[a]] = {{"reached_oracle", reached}, {"exceeded_oracle", exceeded}, {"monotone", monotone}};
  }
  json rows = json::array();
  for (const auto& r : report.seeds) {
    json row = {{"seed", r.seed}, {"oracle", r.oracle.alpha}};
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a)
      row[cfg.algorithms[a]] = {{"alpha_star", r.traces[a].alpha_star},
                                {"t_star", r.traces[a].t_star},
                                {"oracle_gap", r.oracle.alpha - r.traces[a].alpha_star},
                                {"alpha_rechallenged", r.rechallenged[a]}};
    rows.push_back(row);
  }
  report.summary = {{"T", cfg.T},
                    {"algorithms", cfg.algorithms},
                    {"seeds", static_cast<int>(report.seeds.size())},
                    {"per_algorithm", per_algorithm},
                    {"per_seed", rows},
                    {"failures", failures_json(report.failures)}};
  return report;
}

GameReport run_game(const ExperimentConfig& cfg) {
  cfg.validate();
  GameReport report;
  for_each_seed<GameSeedReport>(
      cfg.seeds,
      [&](std::uint64_t seed) {
        GameSeedReport r;
        r.seed = seed;
        r.instance = build_game_instance(cfg, seed);
        r.value = preventive_oracle(r.instance);
        r.nash = check_nash(r.instance, r.value.s_star, r.value.p_star);
        r.deterministic = deterministic_connectivity(r.instance, r.value.s_star);
        return r;
      },
      report.seeds, report.failures);
  return report;
}

void write_design_report(const DesignReport& report, const ExperimentConfig& cfg) {
  for (const auto& r : report.seeds) {
    const std::string base = seed_name("design", r.seed);
    json strategies = json::array();
    for (std::size_t i = 0; i < r.results.size(); ++i) {
      strategies.push_back(design_to_json(r.results[i], r.problem.graph));
      write_text_file(out_path(cfg, base + "_" + cfg.strategies[i] + ".csv"), design_csv(r.results[i]));
    }
    json initial = json::array();
    for (int l : r.problem.initial_edges) {
      const Edge& e = r.problem.graph.edge(l);
      initial.push_back({e.u + 1, e.v + 1});
    }
    write_json(out_path(cfg, base + ".json"),
               {{"seed", r.seed}, {"n", r.problem.graph.num_nodes()}, {"k", r.problem.k},
                {"initial_edges", initial}, {"results", strategies}});
  }
  write_json(out_path(cfg, "design_summary.json"), report.summary);
  rethrow_first(report.failures);
}

void write_prevention_report(const PreventionReport& report, const ExperimentConfig& cfg) {
  for (const auto& r : report.seeds) {
    const std::string base = seed_name("prevent", r.seed);
    const json params = trace_params(cfg, r.instance);
    json algorithms = json::array();
    for (std::size_t a = 0; a < r.traces.size(); ++a) {
      write_text_file(out_path(cfg, base + "_" + cfg.algorithms[a] + ".csv"), trace_csv(r.traces[a]));
      json s = trace_summary(r.traces[a], params, r.seed);
      s["alpha_rechallenged"] = r.rechallenged[a];
      s["oracle_gap"] = r.oracle.alpha - r.traces[a].alpha_star;
      algorithms.push_back(s);
    }
    write_json(out_path(cfg, base + ".json"), {{"seed", r.seed},
                                               {"graph", graph_to_json(r.instance.graph)},
                                               {"oracle", game_value_to_json(r.oracle)},
                                               {"algorithms", algorithms}});
  }
  write_json(out_path(cfg, "prevent_summary.json"), report.summary);
  rethrow_first(report.failures);
}

void write_game_report(const GameReport& report, const ExperimentConfig& cfg) {
  for (const auto& r : report.seeds) {
    json value = game_value_to_json(r.value);
    value["seed"] = r.seed;
    value["graph"] = graph_to_json(r.instance.graph);
    value["nash"] = r.nash;
    value["deterministic_connectivity"] = r.deterministic;
    write_json(out_path(cfg, seed_name("game", r.seed) + ".json"), value);
  }
  rethrow_first(report.failures);
}

void write_generated_graphs(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  for (std::uint64_t seed : seeds)
    write_json(out_path(cfg, seed_name("graph", seed) + ".json"), graph_to_json(gen_random_graph(cfg.n, cfg.m, seed)));
}

}  // namespace forge
