#include <cmath>
#include <set>

#include "doctest.h"
#include "psrolab/forge.hpp"
#include "psrolab/game.hpp"
#include "psrolab/lp.hpp"
#include "psrolab/meta.hpp"
#include "psrolab/psro.hpp"

using namespace psrolab;

namespace {
MssSpec spec_of(MssKind kind) {
  MssSpec s;
  s.kind = kind;
  return s;
}

// Replays PSRO with the given solver on the forged game and returns the
// first iteration whose recorded PE is below the convergence tolerance,
// or -1 if it never converges.
int converge_iter(const ForgeResult& res, const MssSpec& spec, int max_iters) {
  RunRecord rec = run_psro(res.game, spec, res.init, max_iters, 1234);
  if (!rec.converged) return -1;
  return rec.iterations.back().iter;
}
}  // namespace

TEST_CASE("forged games are valid skew-symmetric games of the right size") {
  ForgeResult res = forge_worst_case(spec_of(MssKind::kNash), 8, 0, 11);
  CHECK(res.game.size() == 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(res.game.payoff[i][j] ==
            doctest::Approx(-res.game.payoff[j][i]).epsilon(1e-12));
}

TEST_CASE("the target solver stays exploitable until the final strategy") {
  ForgeResult res = forge_worst_case(spec_of(MssKind::kNash), 8, 0, 11);
  RunRecord rec = run_psro(res.game, res.target_spec, res.init, 20, 5);
  if (!res.target_non_convergent) {
    REQUIRE(rec.converged);
    CHECK(rec.iterations.back().iter == 7);  // n - 1 additions
    for (int i = 0; i < 7; ++i) CHECK(rec.iterations[i].pe > 1e-6);
  }
  // The last strategy dominates: it is a pure equilibrium of the game.
  const auto& last = res.game.payoff[7];
  for (int j = 0; j < 7; ++j) CHECK(last[j] > 0);
}

TEST_CASE("the shortcut solver finishes fast on the same game") {
  for (MssKind kind : {MssKind::kNash, MssKind::kPrd}) {
    CAPTURE(int(kind));
    ForgeResult res = forge_with_shortcut(spec_of(kind), 30, 1, 0, 3);
    int it = converge_iter(res, res.shortcut, 10);
    REQUIRE(it >= 0);
    CHECK(it <= 3);
    if (!res.target_non_convergent) {
      RunRecord slow = run_psro(res.game, res.target_spec, res.init, 28, 1);
      CHECK_FALSE(slow.converged);
    }
  }
}

TEST_CASE("multi-support instances respect the iteration bound s + 2") {
  ForgeResult res = forge_with_shortcut(spec_of(MssKind::kNash), 20, 3, 0, 7);
  CHECK(res.equilibrium_support.size() == 3);
  int it = converge_iter(res, res.shortcut, 12);
  REQUIRE(it >= 0);
  CHECK(it <= 5);
}

TEST_CASE("the full-game equilibrium lives on the reported support") {
  ForgeResult res = forge_with_shortcut(spec_of(MssKind::kNash), 16, 3, 0, 21);
  GameSolution sol = solve_matrix_game(res.game.payoff);
  std::set<int> support(res.equilibrium_support.begin(),
                        res.equilibrium_support.end());
  double on = 0, off = 0;
  for (int i = 0; i < 16; ++i)
    (support.count(i) ? on : off) += sol.row_strategy.probs[i];
  CHECK(on == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(off <= 1e-6);
  CHECK(std::fabs(sol.value) <= 1e-9);
}

TEST_CASE("a nonzero init seat moves the starting strategy") {
  ForgeResult res = forge_worst_case(spec_of(MssKind::kNash), 10, 4, 13);
  CHECK(res.init == 4);
  RunRecord rec = run_psro(res.game, res.target_spec, res.init, 15, 2);
  if (!res.target_non_convergent) CHECK(rec.converged);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(forge_with_shortcut(spec_of(MssKind::kNash), 12, 2, 0, 1),
                  DomainError);
  CHECK_THROWS_AS(forge_with_shortcut(spec_of(MssKind::kNash), 6, 5, 0, 1),
                  SpecError);
}

TEST_CASE("pinned instances bound later payoffs against the anchor columns") {
  ForgeResult res = forge_theorem4_instance(spec_of(MssKind::kNash), 20, 1, 9);
  CHECK(res.game.payoff[2][0] == doctest::Approx(0.95));
  CHECK(res.game.payoff[2][1] == doctest::Approx(0.95));
  for (int i = 3; i < 20; ++i) {
    CHECK(std::fabs(res.game.payoff[i][0]) <= 0.9 + 1e-9);
    CHECK(std::fabs(res.game.payoff[i][1]) <= 0.9 + 1e-9);
  }
  // The anchor pair can only be escaped through the first three seats.
  PeResult pe = population_exploitability(
      res.game, Population::from_members({0, 1}, 20));
  CHECK(pe.full_br <= 2);
  CHECK(pe.pe >= 0.9);
}

TEST_CASE("pinned multi-support instances pass the nondegeneracy check") {
  ForgeResult res = forge_theorem4_instance(spec_of(MssKind::kNash), 20, 3, 9);
  CHECK(nondegeneracy_check(res.game, res.equilibrium_support));
  int it = converge_iter(res, res.shortcut, 12);
  REQUIRE(it >= 0);
  CHECK(it <= 5);
}

TEST_CASE("nondegeneracy check separates regular and degenerate games") {
  Game rps = Game::from_payoff({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  CHECK(nondegeneracy_check(rps, {0, 1, 2}));
  Game zero = Game::from_payoff({{0, 0}, {0, 0}});
  CHECK_FALSE(nondegeneracy_check(zero, {0, 1}));
}

TEST_CASE("prd targets get the same dichotomy") {
  ForgeResult res = forge_with_shortcut(spec_of(MssKind::kPrd), 30, 1, 0, 17);
  int it = converge_iter(res, res.shortcut, 10);
  REQUIRE(it >= 0);
  CHECK(it <= 3);
  if (!res.target_non_convergent) {
    RunRecord slow = run_psro(res.game, res.target_spec, res.init, 28, 1);
    CHECK_FALSE(slow.converged);
    for (const auto& r : slow.iterations) CHECK(r.pe > 1e-6);
  }
}

TEST_CASE("construction logs keep healthy margins") {
  ForgeResult res = forge_worst_case(spec_of(MssKind::kNash), 12, 0, 19);
  CHECK(!res.construction_log.empty());
  for (const auto& entry : res.construction_log) {
    if (entry.added && entry.lp_status == "optimal")
      CHECK(entry.min_margin > 1e-9);
  }
}
