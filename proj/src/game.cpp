#include "forge/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forge/design.hpp"
#include "forge/error.hpp"
#include "forge/sdp.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

constexpr double kNashTol = 1e-8;
// Values closer than this are ties; the earlier (lexicographically smaller)
// candidate is kept.
constexpr double kValueTieTol = 1e-12;
constexpr std::size_t kMaxVertices = 1000000;

double alpha_of(const Graph& g, const Vector& s, const Vector& p) {
  return algebraic_connectivity(laplacian(g, expected_weights(s, p)));
}

}  // namespace

GameInstance GameInstance::make(Graph graph, LinearConstraintSet S, AttackerSet P) {
  const int m = graph.num_edges();
  if (S.size() != m) fail(ErrorKind::dimension, "S size != number of edges");
  if (const auto* box = std::get_if<LinearConstraintSet>(&P)) {
    if (box->size() != m) fail(ErrorKind::dimension, "P size != number of edges");
    if ((box->lower().array() < -kMembershipTol).any() || (box->upper().array() > 1.0 + kMembershipTol).any())
      fail(ErrorKind::domain, "attack probabilities must lie in [0,1]");
  } else {
    auto& list = std::get<VertexList>(P);
    if (list.empty()) fail(ErrorKind::infeasible, "attacker vertex list is empty");
    for (const Vector& v : list) {
      if (v.size() != m) fail(ErrorKind::dimension, "attacker vertex length != number of edges");
      if ((v.array() < -kMembershipTol).any() || (v.array() > 1.0 + kMembershipTol).any())
        fail(ErrorKind::domain, "attack probabilities must lie in [0,1]");
    }
    std::sort(list.begin(), list.end(), lex_less);
    list.erase(std::unique(list.begin(), list.end(),
                           [](const Vector& a, const Vector& b) { return !lex_less(a, b) && !lex_less(b, a); }),
               list.end());
  }
  GameInstance gi{std::move(graph), std::move(S), std::move(P)};
  // Every constraint is an upper bound in the variables, so a set is
  // nonempty iff its pinned lower corner is a member.
  Vector s0 = gi.S.effective_lower();
  for (Eigen::Index l = 0; l < m; ++l) s0[l] = std::ceil(s0[l] - kMembershipTol);
  if (!contains(gi.S, s0)) fail(ErrorKind::infeasible, "coordinator set S has no binary point");
  if (const auto* box = std::get_if<LinearConstraintSet>(&gi.P); box && !contains(*box, box->effective_lower()))
    fail(ErrorKind::infeasible, "attacker set P is empty");
  return gi;
}

VertexList attacker_vertices(const GameInstance& gi) {
  VertexList out = std::visit(
      [](const auto& p) -> VertexList {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, VertexList>)
          return p;
        else
          return enumerate_vertices(p);
      },
      gi.P);
  if (out.size() > kMaxVertices) fail(ErrorKind::size, "attacker polytope has more than 1e6 vertices");
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

bool attacker_contains(const GameInstance& gi, const Vector& p) {
  if (p.size() != gi.graph.num_edges()) fail(ErrorKind::dimension, "p length != number of edges");
  if (const auto* box = std::get_if<LinearConstraintSet>(&gi.P)) return contains(*box, p);

  const VertexList& list = std::get<VertexList>(gi.P);
  for (const Vector& v : list)
    if ((v - p).cwiseAbs().maxCoeff() <= kMembershipTol) return true;
  // Convex-combination feasibility: lambda >= 0, sum lambda = 1, V lambda = p.
  ConicProgram prog;
  std::vector<int> lambda;
  for (std::size_t k = 0; k < list.size(); ++k) lambda.push_back(prog.add_scalar(0.0));
  std::vector<Term> simplex;
  for (int v : lambda) simplex.push_back({VarRef::scalar(v), 1.0});
  prog.add_equality(std::move(simplex), 1.0);
  for (Eigen::Index l = 0; l < p.size(); ++l) {
    std::vector<Term> row;
    for (std::size_t k = 0; k < list.size(); ++k)
      if (list[k][l] != 0.0) row.push_back({VarRef::scalar(lambda[k]), list[k][l]});
    if (row.empty()) {
      if (std::abs(p[l]) > kMembershipTol) return false;
      continue;
    }
    prog.add_equality(std::move(row), p[l]);
  }
  const ConicSolution sol = solve(prog);
  return sol.status == SolveStatus::optimal && sol.primal_residual < kMembershipTol;
}

Response solve_p2(const GameInstance& gi, const Vector& p) {
  if (p.size() != gi.graph.num_edges()) fail(ErrorKind::dimension, "p length != number of edges");
  Response best;
  bool found = false;
  for (const Vector& s : enumerate_binary(gi.S)) {
    const double value = alpha_of(gi.graph, s, p);
    if (!found || value > best.alpha + kValueTieTol) {
      best = {s, value};
      found = true;
    }
  }
  if (!found) fail(ErrorKind::infeasible, "coordinator set S has no binary point");
  return best;
}

RelaxedResponse solve_p2_relaxed(const GameInstance& gi, const Vector& p) {
  const Graph& g = gi.graph;
  const int m = g.num_edges();
  if (p.size() != m) fail(ErrorKind::dimension, "p length != number of edges");
  const Vector w_on = Vector::Ones(m);
  const Vector w_off = Vector::Ones(m) - p;

  Vector base = Vector::Zero(m);
  for (int l : gi.S.fixed_one()) base[l] = 1.0;
  std::vector<int> decided(static_cast<std::size_t>(m), 0);
  int open = 0;
  for (int l = 0; l < m; ++l) {
    if (base[l] > 0.5)
      decided[l] = 1;
    else if (!can_add(gi.S, base, l))
      decided[l] = -1;
    else
      ++open;
  }
  const RelaxedLift lift = solve_lifted_relaxation(g, w_off, w_on, decided, open, gi.S);

  std::vector<int> order;
  for (int l = 0; l < m; ++l)
    if (decided[l] == 0) order.push_back(l);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lift.y[a] > lift.y[b] + 1e-6; });
  Vector s = base;
  for (int l : order)
    if (can_add(gi.S, s, l)) s[l] = 1.0;

  RelaxedResponse out;
  out.s = s;
  out.alpha = alpha_of(g, s, p);
  out.bound = lift.alpha;
  return out;
}

Response solve_p3(const GameInstance& gi, const Vector& s) {
  if (s.size() != gi.graph.num_edges()) fail(ErrorKind::dimension, "s length != number of edges");
  Response best;
  bool found = false;
  for (const Vector& p : attacker_vertices(gi)) {
    const double value = alpha_of(gi.graph, s, p);
    if (!found || value < best.alpha - kValueTieTol) {
      best = {p, value};
      found = true;
    }
  }
  return best;
}

bool check_nash(const GameInstance& gi, const Vector& s, const Vector& p) {
  const double value = alpha_of(gi.graph, s, p);
  if (solve_p2(gi, p).alpha > value + kNashTol) return false;
  if (solve_p3(gi, s).alpha < value - kNashTol) return false;
  return true;
}

bool deterministic_connectivity(const GameInstance& gi, const Vector& s) {
  return is_connected(gi.graph, s);
}

GameValue preventive_oracle(const GameInstance& gi) {
  const VertexList vertices = attacker_vertices(gi);
  GameValue best;
  bool found = false;
  for (const Vector& s : enumerate_binary(gi.S)) {
    // Stop scanning vertices once this s can no longer beat the incumbent.
    double worst = std::numeric_limits<double>::infinity();
    const Vector* argmin = nullptr;
    bool pruned = false;
    for (const Vector& p : vertices) {
      const double value = alpha_of(gi.graph, s, p);
      if (value < worst - kValueTieTol || argmin == nullptr) {
        worst = value;
        argmin = &p;
      }
      if (found && worst <= best.alpha + kValueTieTol) {
        pruned = true;
        break;
      }
    }
    if (pruned) continue;
    if (!found || worst > best.alpha + kValueTieTol) {
      best = {s, *argmin, worst};
      found = true;
    }
  }
  if (!found) fail(ErrorKind::infeasible, "coordinator set S has no binary point");
  return best;
}

}  // namespace forge
