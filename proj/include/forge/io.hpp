#pragma once

#include <string>

#include <json.hpp>

#include "forge/design.hpp"
#include "forge/game.hpp"
#include "forge/prevention.hpp"

namespace forge {

using json = nlohmann::json;

/// Shortest form that round-trips ("%.17g").
std::string format_double(double x);

/// {"n": int, "edges": [[i, j], ...]}, 1-based. Malformed input raises a
/// config error; duplicates and self-loops are rejected by Graph.
json graph_to_json(const Graph& g);
Graph graph_from_json(const json& j);

/// {"lower", "upper", "budget", "degree_caps", "forbidden", "fixed_one"};
/// edge indices and degree-cap nodes are 1-based. Missing bounds default to
/// [0,1]^m.
json constraints_to_json(const LinearConstraintSet& cs);
LinearConstraintSet constraints_from_json(const json& j, const Graph& g);

/// {"vertices": [[...], ...]} or a constraint object.
AttackerSet attacker_from_json(const json& j, const Graph& g);

json design_to_json(const DesignResult& r, const Graph& g);
/// iteration,lambda2 with iteration 0 the initial graph.
std::string design_csv(const DesignResult& r);

json game_value_to_json(const GameValue& v);

/// t,alpha,best_so_far,s_bits,p
std::string trace_csv(const PlayTrace& trace);
/// {t_star, s_star, alpha_star, algorithm, params, seed}
json trace_summary(const PlayTrace& trace, const json& params, std::uint64_t seed);

std::string bits(const Vector& s);

/// Config error when the file is missing or not valid JSON.
json read_json_file(const std::string& path);
/// Creates parent directories; config error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace forge
