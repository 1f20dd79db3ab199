#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "forge/error.hpp"
#include "forge/experiment.hpp"
#include "forge/io.hpp"
#include "forge/spectral.hpp"
#include "helpers.hpp"

using namespace forge;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::solver;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("graph json roundtrip and rejects") {
  const Graph g = gen_random_graph(6, 9, 3);
  CHECK(graph_from_json(graph_to_json(g)) == g);
  const json j = json::parse(R"({"n": 3, "edges": [[1, 2], [2, 3]]})");
  CHECK(graph_from_json(j) == testutil::path3());
  CHECK(kind_of([] { graph_from_json(json::parse(R"({"n": 3, "edges": [[1, 2], [1, 2]]})")); }) == ErrorKind::config);
  CHECK(kind_of([] { graph_from_json(json::parse(R"({"n": 3, "edges": [[2, 2]]})")); }) == ErrorKind::config);
  CHECK(kind_of([] { graph_from_json(json::parse(R"({"n": 3, "edges": [[0, 1]]})")); }) == ErrorKind::config);
  CHECK(kind_of([] { graph_from_json(json::parse(R"({"edges": []})")); }) == ErrorKind::config);
}

TEST_CASE("constraint json roundtrip") {
  const Graph g = Graph::complete(4);
  const json j = json::parse(R"({"lower": [0,0,0,0,0,0], "upper": [1,1,1,1,1,0.5], "budget": 3,
                                 "degree_caps": {"2": 1}, "forbidden": [6], "fixed_one": [1]})");
  const LinearConstraintSet cs = constraints_from_json(j, g);
  CHECK(cs.budget() == 3.0);
  REQUIRE(cs.degree_caps().size() == 1);
  CHECK(cs.degree_caps()[0].node == 1);
  CHECK(cs.forbidden().count(5) == 1);
  CHECK(cs.fixed_one().count(0) == 1);
  const LinearConstraintSet back = constraints_from_json(constraints_to_json(cs), g);
  CHECK(constraints_to_json(back) == constraints_to_json(cs));

  const LinearConstraintSet defaults = constraints_from_json(json::parse(R"({"budget": null})"), g);
  CHECK(defaults.upper() == Vector::Ones(6));
  CHECK_FALSE(defaults.budget().has_value());
  CHECK(kind_of([&] { constraints_from_json(json::parse(R"({"lower": [0]})"), g); }) == ErrorKind::config);
  CHECK(kind_of([&] { constraints_from_json(json::parse(R"({"forbidden": [7]})"), g); }) == ErrorKind::config);

  const AttackerSet vs = attacker_from_json(json::parse(R"({"vertices": [[0,0,0,0,0,0],[1,0,0,0,0,0]]})"), g);
  CHECK(std::get<VertexList>(vs).size() == 2);
}

TEST_CASE("csv formats") {
  DesignResult r;
  r.initial_lambda2 = 0.5;
  r.lambda2_trace = {1.0, 1.25};
  CHECK(design_csv(r) == "iteration,lambda2\n0,0.5\n1,1\n2,1.25\n");

  PlayTrace tr;
  tr.steps = {{1, Vector{{1.0, 0.0}}, Vector{{0.25, 0.5}}, 0.75}, {2, Vector{{0.0, 1.0}}, Vector{{0.1, 0.5}}, 0.5}};
  CHECK(trace_csv(tr) ==
        "t,alpha,best_so_far,s_bits,p\n1,0.75,0.75,10,0.25;0.5\n2,0.5,0.75,01,0.10000000000000001;0.5\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("random graph generator") {
  CHECK(gen_random_graph(3, 3, 1) == testutil::triangle());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = gen_random_graph(14, 28, seed);
    CHECK(g.num_edges() == 28);
    CHECK(is_connected(g));
    CHECK(gen_random_graph(14, 28, seed) == g);
    CHECK(is_connected(gen_random_graph(9, 8, seed)));
  }
  CHECK_FALSE(gen_random_graph(10, 15, 1) == gen_random_graph(10, 15, 2));
  CHECK(kind_of([] { gen_random_graph(4, 2, 1); }) == ErrorKind::domain);
  CHECK(kind_of([] { gen_random_graph(4, 7, 1); }) == ErrorKind::domain);
  CHECK(gen_random_graph(2, 1, 9).num_edges() == 1);
}

TEST_CASE("config parsing") {
  const json j = json::parse(R"({"k": 3, "seeds": [3, 1], "weighting": {"kind": "recency", "gamma": 0.4},
                                 "p_budget": null, "solver": {"tol": 1e-7}})");
  const ExperimentConfig cfg = ExperimentConfig::from_json(j, "prevent");
  CHECK(cfg.k == 3);
  CHECK(cfg.n == 7);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 1});
  CHECK(cfg.weighting.kind == WeightKind::recency);
  CHECK_FALSE(cfg.p_budget.has_value());
  CHECK(cfg.solver.tol == 1e-7);
  CHECK(ExperimentConfig::from_json(json::object(), "design").n == 14);

  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"bogus": 1})"), "gen"); }) == ErrorKind::config);
  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"k": "x"})"), "gen"); }) == ErrorKind::config);
  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"command": "game"})"), "gen"); }) ==
        ErrorKind::config);
  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"strategies": ["magic"]})"), "design").validate(); }) ==
        ErrorKind::config);
  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"seeds": []})"), "design").validate(); }) ==
        ErrorKind::config);
  CHECK(kind_of([] { ExperimentConfig::from_json(json::parse(R"({"graph": "missing.json"})"), "design"); }) ==
        ErrorKind::config);
}

TEST_CASE("design comparison with k = 0 has no wins") {
  ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(R"({"n": 6, "m": 7, "k": 0, "seeds": [1, 2]})"), "design");
  const DesignReport rep = run_design_comparison(cfg);
  REQUIRE(rep.seeds.size() == 2);
  for (const json& c : rep.summary["comparisons"]) CHECK(c["ties"] == 2);
}

TEST_CASE("prevention comparison with a full budget has zero gap") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(json::parse(R"({"n": 5, "m": 6, "k_s": 6, "T": 3, "seeds": [4]})"), "prevent");
  const PreventionReport rep = run_prevention_comparison(cfg);
  REQUIRE(rep.seeds.size() == 1);
  const double full = algebraic_connectivity(laplacian(rep.seeds[0].instance.graph, Vector::Ones(6)));
  CHECK(rep.seeds[0].oracle.alpha == doctest::Approx(full));
  for (const PlayTrace& tr : rep.seeds[0].traces) CHECK(tr.alpha_star == doctest::Approx(full));
  // rand fills S on its first play
  CHECK(rep.seeds[0].traces[0].t_star == 1);
}

TEST_CASE("reports are written in seed order and CSV rows re-validate") {
  const auto dir = std::filesystem::temp_directory_path() / "forge_io_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(R"({"T": 4, "seeds": [2, 1]})"), "prevent");
  cfg.out_dir = dir.string();
  const PreventionReport rep = run_prevention_comparison(cfg);
  CHECK(rep.seeds[0].seed == 1);
  write_prevention_report(rep, cfg);
  std::istringstream csv(slurp(dir / "prevent_seed2_search.csv"));
  const Graph g = rep.seeds[1].instance.graph;
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 5);
    Vector s(11), p(11);
    for (int l = 0; l < 11; ++l) s[l] = cols[3][l] == '1';
    std::stringstream ps(cols[4]);
    int l = 0;
    for (std::string c; std::getline(ps, c, ';');) p[l++] = std::stod(c);
    CHECK(std::abs(expected_connectivity(g, s, p) - std::stod(cols[1])) < 1e-8);
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(std::filesystem::exists(dir / "prevent_summary.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a failing seed still flushes the others") {
  const auto dir = std::filesystem::temp_directory_path() / "forge_io_fail";
  std::filesystem::remove_all(dir);
  // k too large for the 3-node graph given inline
  ExperimentConfig cfg = ExperimentConfig::from_json(
      json::parse(R"({"graph": {"n": 3, "edges": [[1, 2]]}, "k": 2, "strategies": ["greedy"], "seeds": [1]})"), "design");
  cfg.out_dir = dir.string();
  write_design_report(run_design_comparison(cfg), cfg);
  CHECK(std::filesystem::exists(dir / "design_seed1_greedy.csv"));
  cfg.k = 5;
  const DesignReport bad = run_design_comparison(cfg);
  CHECK(bad.failures.size() == 1);
  CHECK_THROWS_AS(write_design_report(bad, cfg), Error);
  CHECK(std::filesystem::exists(dir / "design_summary.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("thread limit") {
  setenv("FORGE_THREADS", "3", 1);
  CHECK(thread_limit() == 3);
  setenv("FORGE_THREADS", "zero", 1);
  CHECK(kind_of([] { thread_limit(); }) == ErrorKind::config);
  unsetenv("FORGE_THREADS");
  CHECK(thread_limit() >= 1);
}
