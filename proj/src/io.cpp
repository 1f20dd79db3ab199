#include "forge/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_vector(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::config, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::config, std::string(what) + " entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

int to_index(const json& j, int count, const char* what) {
  if (!j.is_number_integer()) fail(ErrorKind::config, std::string(what) + " must be integers");
  const long long i = j.get<long long>();
  if (i < 1 || i > count) fail(ErrorKind::config, std::string(what) + " index " + std::to_string(i) + " out of range");
  return static_cast<int>(i - 1);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u + 1, e.v + 1});
  return {{"n", g.num_nodes()}, {"edges", edges}};
}

Graph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges")) fail(ErrorKind::config, "graph needs \"n\" and \"edges\"");
  if (!j["n"].is_number_integer()) fail(ErrorKind::config, "graph \"n\" must be an integer");
  const int n = j["n"].get<int>();
  std::vector<Edge> edges;
  for (const json& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) fail(ErrorKind::config, "each edge must be a pair [i, j]");
    edges.push_back({to_index(e[0], n, "edge endpoint"), to_index(e[1], n, "edge endpoint")});
  }
  try {
    return Graph(n, std::move(edges));
  } catch (const Error& err) {
    fail(ErrorKind::config, std::string("invalid graph: ") + err.what());
  }
}

json constraints_to_json(const LinearConstraintSet& cs) {
  json j;
  j["lower"] = to_std(cs.lower());
  j["upper"] = to_std(cs.upper());
  j["budget"] = cs.budget() ? json(*cs.budget()) : json(nullptr);
  if (cs.degree_caps().empty()) {
    j["degree_caps"] = nullptr;
  } else {
    json caps = json::object();
    for (const DegreeCap& c : cs.degree_caps()) caps[std::to_string(c.node + 1)] = c.cap;
    j["degree_caps"] = caps;
  }
  json forbidden = json::array(), fixed = json::array();
  for (int l : cs.forbidden()) forbidden.push_back(l + 1);
  for (int l : cs.fixed_one()) fixed.push_back(l + 1);
  j["forbidden"] = forbidden;
  j["fixed_one"] = fixed;
  return j;
}

LinearConstraintSet constraints_from_json(const json& j, const Graph& g) {
  if (!j.is_object()) fail(ErrorKind::config, "constraint set must be an object");
  const int m = g.num_edges();
  Vector lower = j.contains("lower") ? to_vector(j["lower"], "lower") : Vector::Zero(m);
  Vector upper = j.contains("upper") ? to_vector(j["upper"], "upper") : Vector::Ones(m);
  if (lower.size() != m || upper.size() != m) fail(ErrorKind::config, "bounds must have one entry per edge");
  try {
    LinearConstraintSet cs(std::move(lower), std::move(upper));
    if (j.contains("budget") && !j["budget"].is_null()) {
      if (!j["budget"].is_number()) fail(ErrorKind::config, "budget must be a number or null");
      cs.with_budget(j["budget"].get<double>());
    }
    if (j.contains("degree_caps") && !j["degree_caps"].is_null()) {
      if (!j["degree_caps"].is_object()) fail(ErrorKind::config, "degree_caps must be an object {node: cap}");
      for (const auto& [key, cap] : j["degree_caps"].items()) {
        int node = 0;
        try {
          node = std::stoi(key);
        } catch (const std::exception&) {
          fail(ErrorKind::config, "degree_caps key '" + key + "' is not a node number");
        }
        if (node < 1 || node > g.num_nodes()) fail(ErrorKind::config, "degree_caps node out of range");
        if (!cap.is_number()) fail(ErrorKind::config, "degree cap must be a number");
        cs.with_degree_cap(g, node - 1, cap.get<double>());
      }
    }
    if (j.contains("forbidden"))
      for (const json& l : j["forbidden"]) cs.forbid(to_index(l, m, "forbidden"));
    if (j.contains("fixed_one"))
      for (const json& l : j["fixed_one"]) cs.fix_one(to_index(l, m, "fixed_one"));
    return cs;
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, std::string("invalid constraint set: ") + err.what());
  }
}

AttackerSet attacker_from_json(const json& j, const Graph& g) {
  if (j.is_object() && j.contains("vertices")) {
    VertexList list;
    for (const json& v : j["vertices"]) {
      list.push_back(to_vector(v, "vertex"));
      if (list.back().size() != g.num_edges()) fail(ErrorKind::config, "vertex length must equal the edge count");
    }
    return list;
  }
  return constraints_from_json(j, g);
}

json design_to_json(const DesignResult& r, const Graph& g) {
  json added = json::array();
  for (int l : r.added_edges) {
    const Edge& e = g.edge(l);
    added.push_back({e.u + 1, e.v + 1});
  }
  return {{"strategy", r.strategy},
          {"added_edges", added},
          {"lambda2_trace", r.lambda2_trace},
          {"initial_lambda2", r.initial_lambda2},
          {"final_lambda2", r.final_lambda2},
          {"stopped_early", r.stopped_early}};
}

std::string design_csv(const DesignResult& r) {
  std::ostringstream out;
  out << "iteration,lambda2\n0," << format_double(r.initial_lambda2) << "\n";
  for (std::size_t i = 0; i < r.lambda2_trace.size(); ++i)
    out << i + 1 << "," << format_double(r.lambda2_trace[i]) << "\n";
  return out.str();
}

std::string bits(const Vector& s) {
  std::string out;
  for (Eigen::Index l = 0; l < s.size(); ++l) out += s[l] > 0.5 ? '1' : '0';
  return out;
}

json game_value_to_json(const GameValue& v) {
  return {{"s_star", bits(v.s_star)}, {"p_star", to_std(v.p_star)}, {"alpha", v.alpha}};
}

std::string trace_csv(const PlayTrace& trace) {
  std::ostringstream out;
  out << "t,alpha,best_so_far,s_bits,p\n";
  const std::vector<double> best = trace.best_so_far();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const PlayStep& st = trace.steps[i];
    out << st.t << "," << format_double(st.alpha) << "," << format_double(best[i]) << "," << bits(st.s) << ",";
    for (Eigen::Index l = 0; l < st.p.size(); ++l) out << (l ? ";" : "") << format_double(st.p[l]);
    out << "\n";
  }
  return out.str();
}

json trace_summary(const PlayTrace& trace, const json& params, std::uint64_t seed) {
  return {{"algorithm", trace.algorithm},
          {"t_star", trace.t_star},
          {"s_star", bits(trace.s_star)},
          {"alpha_star", trace.alpha_star},
          {"params", params},
          {"seed", seed}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::config, "cannot write '" + path + "'");
  out << text;
}

}  // namespace forge
