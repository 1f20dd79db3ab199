#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "forge/game.hpp"

namespace forge {

enum class WeightKind { uniform, recency, penalty };

/// How past attacker plays are mixed in the convex-combination algorithm.
struct WeightingScheme {
  WeightKind kind = WeightKind::uniform;
  double gamma = 0.5;  // recency only, in (0,1)
};

std::string to_string(WeightKind kind);
/// Parses "uniform" | "recency" | "penalty"; config error otherwise.
WeightKind parse_weight_kind(const std::string& name);

struct PlayStep {
  int t = 0;  // 1-based
  Vector s;
  Vector p;
  double alpha = 0.0;
};

struct PlayTrace {
  std::string algorithm;
  std::vector<PlayStep> steps;
  int t_star = 0;
  Vector s_star;
  double alpha_star = 0.0;
  /// Size of the accumulated attack set after each step (pointwise search).
  std::vector<int> pbar_sizes;
  /// Fiedler edge scores (v_i - v_j)^2 of the unattacked graph (random sampling).
  Vector scores;

  /// max_{k<=t} alpha_k for every t.
  std::vector<double> best_so_far() const;
};

/// Maps the coordinator's play to the attacker's response.
using AttackerOracle = std::function<Vector(const Vector& s)>;

/// The exact attacker best response (solve_p3).
AttackerOracle best_response_attacker(const GameInstance& gi);

/// theta(1..t). Penalty weights fall back to uniform when all alphas are 0.
/// Domain error for t < 1, a short trace, or gamma outside (0,1).
Vector weights(const WeightingScheme& ws, const PlayTrace& trace, int t);

/// Random sampling: each round fills s by drawing feasible edges uniformly
/// until none is left.
PlayTrace alg_rand(const GameInstance& gi, int T, const AttackerOracle& attacker, std::uint64_t seed);

/// Convex combinations: each round best-responds to the weighted mix of past
/// attacker plays.
PlayTrace alg_cvx(const GameInstance& gi, int T, const WeightingScheme& ws, const AttackerOracle& attacker);

/// Pointwise search: each round maximizes the worst case over the distinct
/// attacker plays seen so far.
PlayTrace alg_search(const GameInstance& gi, int T, const AttackerOracle& attacker);

/// mt19937_64 with a hand-rolled bounded draw: std distributions are not
/// specified bit-for-bit, the engine is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform integer in [0, bound) without modulo bias. bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace forge
