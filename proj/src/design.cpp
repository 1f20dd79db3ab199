#include "forge/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forge/error.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

// Scores within this of the maximum count as tied; lowest index wins.
constexpr double kScoreTieTol = 1e-9;
// Relaxed solutions carry solver noise, so their ties are looser.
constexpr double kRelaxedTieTol = 1e-6;
constexpr double kBruteForceCap = 2e6;

int pick_max(const std::vector<std::pair<int, double>>& candidates, double tie_tol) {
  if (candidates.empty()) return -1;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [l, v] : candidates) best = std::max(best, v);
  const double cut = best - tie_tol * std::max(1.0, std::abs(best));
  for (const auto& [l, v] : candidates)
    if (v >= cut) return l;
  return -1;
}

// Sum of the decided-on x values plus (y + 1) / 2 over candidates in `row`:
// emits sum_{l in row, candidate} y_l <= 2 (cap - fixed) - (#candidates).
void add_capped_sum(ConicProgram& prog, const std::vector<int>& edges, const std::vector<int>& decided,
                    const std::vector<int>& slot, const std::vector<int>& y_vars, double cap) {
  double fixed = 0.0;
  std::vector<Term> terms;
  for (int l : edges) {
    if (decided[l] > 0) fixed += 1.0;
    if (decided[l] == 0) terms.push_back({VarRef::scalar(y_vars[slot[l]]), 1.0});
  }
  if (terms.empty()) {
    if (fixed > cap + kMembershipTol) fail(ErrorKind::infeasible, "decided edges already exceed a cap");
    return;
  }
  const double rhs = 2.0 * (cap - fixed) - static_cast<double>(terms.size());
  // Redundant when every candidate may be on.
  if (rhs >= static_cast<double>(terms.size())) return;
  prog.add_inequality(std::move(terms), rhs);
}

void check_decided(const std::vector<int>& decided, int m) {
  if (static_cast<int>(decided.size()) != m) fail(ErrorKind::dimension, "decided vector length != m");
}

DesignResult finish(const DesignProblem& dp, DesignResult r, const Vector& initial) {
  Vector x = initial;
  r.initial_lambda2 = algebraic_connectivity(laplacian(dp.graph, x));
  r.lambda2_trace.clear();
  for (int l : r.added_edges) {
    x[l] = 1.0;
    r.lambda2_trace.push_back(algebraic_connectivity(laplacian(dp.graph, x)));
  }
  r.final_lambda2 = r.lambda2_trace.empty() ? r.initial_lambda2 : r.lambda2_trace.back();
  return r;
}

}  // namespace

DesignProblem DesignProblem::make(Graph graph, std::vector<int> initial_edges, int k, LinearConstraintSet X) {
  const int m = graph.num_edges();
  if (X.size() != m) fail(ErrorKind::dimension, "constraint set size != number of candidate edges");
  if (k < 0) fail(ErrorKind::domain, "k must be nonnegative");
  std::vector<int> sorted = initial_edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorKind::domain, "initial edges repeat");
  for (int l : sorted) {
    if (l < 0 || l >= m) fail(ErrorKind::domain, "initial edge index out of range");
    X.fix_one(l);
  }
  if (k + static_cast<int>(sorted.size()) > m) fail(ErrorKind::domain, "k + |E0| exceeds the number of edges");
  DesignProblem dp{std::move(graph), std::move(sorted), k, std::move(X)};
  if (!contains(dp.X, dp.initial_indicator())) fail(ErrorKind::infeasible, "initial edges violate X");
  return dp;
}

DesignProblem DesignProblem::make(Graph graph, std::vector<int> initial_edges, int k) {
  const int m = graph.num_edges();
  return make(std::move(graph), std::move(initial_edges), k, LinearConstraintSet::box(m, 0.0, 1.0));
}

Vector DesignProblem::initial_indicator() const {
  Vector x = Vector::Zero(graph.num_edges());
  for (int l : initial_edges) x[l] = 1.0;
  return x;
}

bool can_add(const LinearConstraintSet& X, const Vector& current, int l) {
  if (current[l] > 0.5) return false;
  if (X.forbidden().contains(l)) return false;
  if (X.upper()[l] < 1.0 - kMembershipTol) return false;
  if (X.budget() && current.sum() + 1.0 > *X.budget() + kMembershipTol) return false;
  for (const DegreeCap& dc : X.degree_caps()) {
    if (std::find(dc.edges.begin(), dc.edges.end(), l) == dc.edges.end()) continue;
    double load = 1.0;
    for (int e : dc.edges) load += current[e];
    if (load > dc.cap + kMembershipTol) return false;
  }
  return true;
}

Matrix ones_complement_basis(int n) {
  // Helmert basis: column j averages the first j+1 nodes against node j+1.
  Matrix q = Matrix::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    const double denom = std::sqrt(static_cast<double>(j + 1) * static_cast<double>(j + 2));
    for (int i = 0; i <= j; ++i) q(i, j) = 1.0 / denom;
    q(j + 1, j) = -static_cast<double>(j + 1) / denom;
  }
  return q;
}

RelaxedLift solve_lifted_relaxation(const Graph& g, const Vector& w_off, const Vector& w_on,
                                    const std::vector<int>& decided, int budget,
                                    const LinearConstraintSet& X, const SolverSettings& settings) {
  const int m = g.num_edges();
  const int n = g.num_nodes();
  check_decided(decided, m);
  if (w_off.size() != m || w_on.size() != m || X.size() != m)
    fail(ErrorKind::dimension, "weight or constraint length != m");

  std::vector<int> candidates;
  std::vector<int> slot(static_cast<std::size_t>(m), -1);
  Vector fixed_weights(m);
  for (int l = 0; l < m; ++l) {
    if (decided[l] > 0) {
      fixed_weights[l] = w_on[l];
    } else if (decided[l] < 0) {
      fixed_weights[l] = w_off[l];
    } else {
      slot[l] = static_cast<int>(candidates.size());
      candidates.push_back(l);
      fixed_weights[l] = 0.5 * (w_on[l] + w_off[l]);
    }
  }
  const int f = static_cast<int>(candidates.size());

  RelaxedLift out;
  out.y = Vector(m);
  for (int l = 0; l < m; ++l) out.y[l] = decided[l] > 0 ? 1.0 : -1.0;

  if (f == 0 || budget <= 0) {
    const Vector x = (out.y.array() + 1.0) * 0.5;
    out.alpha = algebraic_connectivity(laplacian(g, w_off + (w_on - w_off).cwiseProduct(x)));
    Vector ext(m + 1);
    ext << out.y, 1.0;
    out.lifted = ext * ext.transpose();
    return out;
  }

  ConicProgram prog;
  const int lift = prog.add_psd_block(f + 1);
  std::vector<int> y_vars(static_cast<std::size_t>(f));
  for (int i = 0; i < f; ++i) y_vars[i] = prog.add_scalar(-1.0, 1.0);
  const int alpha = prog.add_scalar();

  for (int i = 0; i <= f; ++i) prog.add_equality({{VarRef::entry(lift, i, i), 1.0}}, 1.0);
  for (int i = 0; i < f; ++i)
    prog.add_equality({{VarRef::scalar(y_vars[i]), 1.0}, {VarRef::entry(lift, i, f), -1.0}}, 0.0);

  // Q^T L(w) Q - alpha I >= 0 with w_l = fixed + (w_on - w_off)/2 * y_l.
  const Matrix q = ones_complement_basis(n);
  const Matrix incidence = incidence_matrix(g);
  const Matrix qe = q.transpose() * incidence;  // (n-1) x m
  std::vector<std::pair<VarRef, Matrix>> coefficients;
  for (int i = 0; i < f; ++i) {
    const int l = candidates[i];
    const double half = 0.5 * (w_on[l] - w_off[l]);
    if (half == 0.0) continue;
    coefficients.emplace_back(VarRef::scalar(y_vars[i]), half * qe.col(l) * qe.col(l).transpose());
  }
  coefficients.emplace_back(VarRef::scalar(alpha), -Matrix::Identity(n - 1, n - 1));
  const Matrix constant = qe * fixed_weights.asDiagonal() * qe.transpose();
  prog.add_lmi(constant, std::move(coefficients));

  add_capped_sum(prog, candidates, decided, slot, y_vars, budget);
  for (int i = 0; i < f; ++i) {
    const int l = candidates[i];
    if (X.lower()[l] > kMembershipTol) prog.add_inequality({{VarRef::scalar(y_vars[i]), -1.0}}, 1.0 - 2.0 * X.lower()[l]);
    if (X.upper()[l] < 1.0 - kMembershipTol) prog.add_inequality({{VarRef::scalar(y_vars[i]), 1.0}}, 2.0 * X.upper()[l] - 1.0);
  }
  if (X.budget()) {
    std::vector<int> all(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) all[l] = l;
    add_capped_sum(prog, all, decided, slot, y_vars, *X.budget());
  }
  for (const DegreeCap& dc : X.degree_caps()) add_capped_sum(prog, dc.edges, decided, slot, y_vars, dc.cap);

  prog.set_objective({{VarRef::scalar(alpha), 1.0}});
  const ConicSolution sol = solve(prog, settings);
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status == SolveStatus::infeasible) fail(ErrorKind::infeasible, "relaxed lift is infeasible");
  if (sol.status != SolveStatus::optimal)
    fail(ErrorKind::solver, std::string("relaxed lift solve ended with status ") + to_string(sol.status));

  out.alpha = sol.scalars[alpha];
  for (int i = 0; i < f; ++i) out.y[candidates[i]] = sol.blocks[lift](i, f);

  // Decided edges are copies (or negated copies) of the last lifted row.
  Matrix t = Matrix::Zero(m + 1, f + 1);
  for (int l = 0; l < m; ++l) {
    if (decided[l] == 0)
      t(l, slot[l]) = 1.0;
    else
      t(l, f) = decided[l] > 0 ? 1.0 : -1.0;
  }
  t(m, f) = 1.0;
  out.lifted = t * sol.blocks[lift] * t.transpose();
  return out;
}

namespace {

std::vector<int> decided_for(const DesignProblem& dp, const Vector& current) {
  std::vector<int> decided(static_cast<std::size_t>(dp.graph.num_edges()), 0);
  for (int l = 0; l < dp.graph.num_edges(); ++l) {
    if (current[l] > 0.5)
      decided[l] = 1;
    else if (!can_add(dp.X, current, l) && dp.X.lower()[l] <= kMembershipTol)
      decided[l] = -1;
  }
  return decided;
}

}  // namespace

DesignResult greedy_fiedler(const DesignProblem& dp) {
  DesignResult r;
  r.strategy = "fiedler";
  Vector x = dp.initial_indicator();
  for (int step = 0; step < dp.k; ++step) {
    const Vector scores = edge_scores(dp.graph, x);
    std::vector<std::pair<int, double>> options;
    for (int l = 0; l < dp.graph.num_edges(); ++l)
      if (can_add(dp.X, x, l)) options.emplace_back(l, scores[l]);
    const int pick = pick_max(options, kScoreTieTol);
    if (pick < 0) {
      r.stopped_early = true;
      break;
    }
    x[pick] = 1.0;
    r.added_edges.push_back(pick);
  }
  return finish(dp, std::move(r), dp.initial_indicator());
}

DesignResult convex_hull_relax(const DesignProblem& dp, const SolverSettings& settings) {
  DesignResult r;
  r.strategy = "convex_hull";
  const int m = dp.graph.num_edges();
  const int n = dp.graph.num_nodes();
  const Matrix qe = ones_complement_basis(n).transpose() * incidence_matrix(dp.graph);
  Vector x = dp.initial_indicator();

  for (int step = 0; step < dp.k; ++step) {
    const std::vector<int> decided = decided_for(dp, x);
    std::vector<int> candidates;
    for (int l = 0; l < m; ++l)
      if (decided[l] == 0) candidates.push_back(l);
    if (candidates.empty()) {
      r.stopped_early = true;
      break;
    }

    ConicProgram prog;
    std::vector<int> vars;
    std::vector<int> slot(static_cast<std::size_t>(m), -1);
    for (int l : candidates) {
      slot[l] = static_cast<int>(vars.size());
      vars.push_back(prog.add_scalar(std::max(0.0, dp.X.lower()[l]), std::min(1.0, dp.X.upper()[l])));
    }
    const int alpha = prog.add_scalar();
    std::vector<std::pair<VarRef, Matrix>> coefficients;
    for (int l : candidates)
      coefficients.emplace_back(VarRef::scalar(vars[slot[l]]), qe.col(l) * qe.col(l).transpose());
    coefficients.emplace_back(VarRef::scalar(alpha), -Matrix::Identity(n - 1, n - 1));
    prog.add_lmi(qe * x.asDiagonal() * qe.transpose(), std::move(coefficients));

    auto capped = [&](const std::vector<int>& edges, double cap) {
      double fixed = 0.0;
      std::vector<Term> terms;
      for (int l : edges) {
        if (decided[l] > 0) fixed += 1.0;
        if (decided[l] == 0) terms.push_back({VarRef::scalar(vars[slot[l]]), 1.0});
      }
      if (terms.empty() || cap - fixed >= static_cast<double>(terms.size())) return;
      prog.add_inequality(std::move(terms), cap - fixed);
    };
    std::vector<int> all(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) all[l] = l;
    capped(candidates, dp.k - step);
    if (dp.X.budget()) capped(all, *dp.X.budget());
    for (const DegreeCap& dc : dp.X.degree_caps()) capped(dc.edges, dc.cap);
    prog.set_objective({{VarRef::scalar(alpha), 1.0}});

    const ConicSolution sol = solve(prog, settings);
    if (sol.status != SolveStatus::optimal)
      fail(ErrorKind::solver, "convex hull solve at iteration " + std::to_string(step + 1) + " ended with status " +
                                  to_string(sol.status));
    r.relaxation_values.push_back(sol.scalars[alpha]);

    std::vector<std::pair<int, double>> options;
    for (int l : candidates)
      if (can_add(dp.X, x, l)) options.emplace_back(l, sol.scalars[vars[slot[l]]]);
    const int pick = pick_max(options, kRelaxedTieTol);
    if (pick < 0) {
      r.stopped_early = true;
      break;
    }
    x[pick] = 1.0;
    r.added_edges.push_back(pick);
  }
  return finish(dp, std::move(r), dp.initial_indicator());
}

DesignResult sdp_relax(const DesignProblem& dp, const SolverSettings& settings) {
  DesignResult r;
  r.strategy = "sdp";
  const int m = dp.graph.num_edges();
  const Vector w_off = Vector::Zero(m);
  const Vector w_on = Vector::Ones(m);
  Vector x = dp.initial_indicator();

  for (int step = 0; step < dp.k; ++step) {
    const std::vector<int> decided = decided_for(dp, x);
    if (std::none_of(decided.begin(), decided.end(), [](int d) { return d == 0; })) {
      r.stopped_early = true;
      break;
    }
    RelaxedLift lift;
    try {
      lift = solve_lifted_relaxation(dp.graph, w_off, w_on, decided, dp.k - step, dp.X, settings);
    } catch (const Error& e) {
      throw Error(e.kind(), "sdp relaxation at iteration " + std::to_string(step + 1) + ": " + e.what());
    }
    r.relaxation_values.push_back(lift.alpha);

    std::vector<std::pair<int, double>> options;
    for (int l = 0; l < m; ++l)
      if (decided[l] == 0 && can_add(dp.X, x, l)) options.emplace_back(l, lift.y[l]);
    const int pick = pick_max(options, kRelaxedTieTol);
    if (pick < 0) {
      r.stopped_early = true;
      break;
    }
    x[pick] = 1.0;
    r.added_edges.push_back(pick);
  }
  return finish(dp, std::move(r), dp.initial_indicator());
}

DesignResult brute_force_design(const DesignProblem& dp) {
  const int m = dp.graph.num_edges();
  const Vector initial = dp.initial_indicator();
  std::vector<int> pool;
  for (int l = 0; l < m; ++l)
    if (initial[l] < 0.5 && !dp.X.forbidden().contains(l) && dp.X.upper()[l] >= 1.0 - kMembershipTol) pool.push_back(l);
  const int p = static_cast<int>(pool.size());
  const int kmax = std::min(dp.k, p);

  double count = 0.0;
  for (int j = 0; j <= kmax; ++j) {
    double c = 1.0;
    for (int i = 0; i < j; ++i) c = c * (p - i) / (i + 1);
    count += c;
  }
  if (count > kBruteForceCap) fail(ErrorKind::size, "brute-force design exceeds 2e6 candidate sets");

  // Visit subsets in lexicographic order of their sorted index lists. Only
  // maximal sets are scored: adding an edge never lowers lambda2, so the
  // optimum is attained at one, and a tie never resolves to adding less.
  // The first maximizer is the lexicographically smallest maximal set.
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_set;
  bool found = false;
  std::vector<int> chosen;
  Vector x = initial;
  auto maximal = [&]() {
    if (static_cast<int>(chosen.size()) == kmax) return true;
    for (int l : pool)
      if (can_add(dp.X, x, l)) return false;
    return true;
  };
  auto visit = [&]() {
    if (!maximal()) return;
    const double value = algebraic_connectivity(laplacian(dp.graph, x));
    if (!found || value > best + 1e-12) {
      best = value;
      best_set.clear();
      for (int i : chosen) best_set.push_back(pool[i]);
      found = true;
    }
  };
  // Every constraint of X is monotone in the added edges, so an infeasible
  // set has no feasible superset.
  auto recurse = [&](auto&& self, int start) -> void {
    if (!contains(dp.X, x)) return;
    visit();
    if (static_cast<int>(chosen.size()) == kmax) return;
    for (int i = start; i < p; ++i) {
      chosen.push_back(i);
      x[pool[i]] = 1.0;
      self(self, i + 1);
      x[pool[i]] = 0.0;
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  if (!found) fail(ErrorKind::infeasible, "no feasible edge set");

  DesignResult r;
  r.strategy = "brute_force";
  r.added_edges = best_set;
  r.stopped_early = static_cast<int>(best_set.size()) < dp.k;
  return finish(dp, std::move(r), initial);
}

}  // namespace forge
