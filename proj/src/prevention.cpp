#include "forge/prevention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forge/design.hpp"
#include "forge/error.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

constexpr double kTieTol = 1e-12;

double alpha_of(const Graph& g, const Vector& s, const Vector& p) {
  return algebraic_connectivity(laplacian(g, expected_weights(s, p)));
}

void check_T(int T) {
  if (T < 1) fail(ErrorKind::domain, "T must be at least 1");
}

// Starting play: nothing protected beyond what S pins to one.
Vector minimal_play(const GameInstance& gi) {
  Vector s = Vector::Zero(gi.graph.num_edges());
  for (int l : gi.S.fixed_one()) s[l] = 1.0;
  if (!contains(gi.S, s)) fail(ErrorKind::infeasible, "S does not contain its minimal play");
  return s;
}

void record(const GameInstance& gi, PlayTrace& trace, int t, Vector s, Vector p) {
  if (!contains(gi.S, s)) fail(ErrorKind::domain, "coordinator play at t=" + std::to_string(t) + " is outside S");
  if (!attacker_contains(gi, p)) fail(ErrorKind::domain, "attacker play at t=" + std::to_string(t) + " is outside P");
  const double a = alpha_of(gi.graph, s, p);
  trace.steps.push_back({t, std::move(s), std::move(p), a});
}

void finish(PlayTrace& trace) {
  trace.t_star = 0;
  for (const PlayStep& st : trace.steps) {
    if (trace.t_star == 0 || st.alpha > trace.alpha_star + kTieTol) {
      trace.t_star = st.t;
      trace.alpha_star = st.alpha;
      trace.s_star = st.s;
    }
  }
}

bool same_play(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff() <= kTieTol; }

}  // namespace

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::uniform: return "uniform";
    case WeightKind::recency: return "recency";
    case WeightKind::penalty: return "penalty";
  }
  return "?";
}

WeightKind parse_weight_kind(const std::string& name) {
  if (name == "uniform") return WeightKind::uniform;
  if (name == "recency") return WeightKind::recency;
  if (name == "penalty") return WeightKind::penalty;
  fail(ErrorKind::config, "unknown weighting scheme '" + name + "'");
}

std::vector<double> PlayTrace::best_so_far() const {
  std::vector<double> out;
  double best = -std::numeric_limits<double>::infinity();
  for (const PlayStep& st : steps) {
    best = std::max(best, st.alpha);
    out.push_back(best);
  }
  return out;
}

AttackerOracle best_response_attacker(const GameInstance& gi) {
  return [&gi](const Vector& s) { return solve_p3(gi, s).play; };
}

Vector weights(const WeightingScheme& ws, const PlayTrace& trace, int t) {
  if (t < 1) fail(ErrorKind::domain, "weights need t >= 1");
  Vector theta(t);
  switch (ws.kind) {
    case WeightKind::uniform:
      theta.setConstant(1.0 / t);
      break;
    case WeightKind::recency: {
      if (!(ws.gamma > 0.0 && ws.gamma < 1.0)) fail(ErrorKind::domain, "recency gamma must lie in (0,1)");
      for (int k = 1; k <= t; ++k) theta[k - 1] = std::pow(ws.gamma, t - k);
      theta /= theta.sum();
      break;
    }
    case WeightKind::penalty: {
      if (static_cast<int>(trace.steps.size()) < t) fail(ErrorKind::domain, "trace shorter than t");
      for (int k = 0; k < t; ++k) theta[k] = std::max(0.0, trace.steps[k].alpha);
      const double total = theta.sum();
      if (total > 0.0)
        theta /= total;
      else
        theta.setConstant(1.0 / t);
      break;
    }
  }
  return theta;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorKind::domain, "bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return x % bound;
}

PlayTrace alg_rand(const GameInstance& gi, int T, const AttackerOracle& attacker, std::uint64_t seed) {
  check_T(T);
  const int m = gi.graph.num_edges();
  PlayTrace trace;
  trace.algorithm = "rand";
  // Computed for the record only; sampling stays uniform.
  trace.scores = edge_scores(gi.graph, Vector::Ones(m));
  const Vector start = minimal_play(gi);
  for (int t = 1; t <= T; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    Vector s = start;
    std::vector<int> open;
    for (;;) {
      open.clear();
      for (int l = 0; l < m; ++l)
        if (can_add(gi.S, s, l)) open.push_back(l);
      if (open.empty()) break;
      s[open[rng.below(open.size())]] = 1.0;
    }
    Vector p = attacker(s);
    record(gi, trace, t, std::move(s), std::move(p));
  }
  finish(trace);
  return trace;
}

PlayTrace alg_cvx(const GameInstance& gi, int T, const WeightingScheme& ws, const AttackerOracle& attacker) {
  check_T(T);
  PlayTrace trace;
  trace.algorithm = "cvx";
  for (int t = 1; t <= T; ++t) {
    Vector s;
    if (t == 1) {
      s = minimal_play(gi);
    } else {
      const Vector theta = weights(ws, trace, t - 1);
      Vector mix = Vector::Zero(gi.graph.num_edges());
      for (int k = 0; k < t - 1; ++k) mix += theta[k] * trace.steps[k].p;
      s = solve_p2(gi, mix).play;
    }
    Vector p = attacker(s);
    record(gi, trace, t, std::move(s), std::move(p));
  }
  finish(trace);
  return trace;
}

PlayTrace alg_search(const GameInstance& gi, int T, const AttackerOracle& attacker) {
  check_T(T);
  PlayTrace trace;
  trace.algorithm = "search";
  const std::vector<Vector> plays = enumerate_binary(gi.S);
  // worst[i] = min over the plays seen so far of alpha(plays[i], .)
  std::vector<double> worst(plays.size(), std::numeric_limits<double>::infinity());
  std::vector<Vector> pbar;
  for (int t = 1; t <= T; ++t) {
    Vector s;
    if (t == 1) {
      s = minimal_play(gi);
    } else {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < plays.size(); ++i)
        if (worst[i] > worst[arg] + kTieTol) arg = i;
      s = plays[arg];
    }
    Vector p = attacker(s);
    const bool seen = std::any_of(pbar.begin(), pbar.end(), [&](const Vector& q) { return same_play(q, p); });
    if (!seen) {
      for (std::size_t i = 0; i < plays.size(); ++i) worst[i] = std::min(worst[i], alpha_of(gi.graph, plays[i], p));
      pbar.push_back(p);
    }
    record(gi, trace, t, std::move(s), std::move(p));
    trace.pbar_sizes.push_back(static_cast<int>(pbar.size()));
  }
  finish(trace);
  return trace;
}

}  // namespace forge
