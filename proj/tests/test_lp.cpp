#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "psrolab/common.hpp"
#include "psrolab/game.hpp"
#include "psrolab/lp.hpp"

using namespace psrolab;

TEST_CASE("simplex solves a simple bounded LP with duals") {
  // max x + y s.t. x <= 1, y <= 2.
  LpResult r = simplex_maximize({{1, 0}, {0, 1}}, {1, 2}, {1, 1});
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(2.0));
  CHECK(r.dual[0] == doctest::Approx(1.0));
  CHECK(r.dual[1] == doctest::Approx(1.0));
}

TEST_CASE("phase one handles negative right-hand sides") {
  // max -x s.t. -x <= -1  (i.e. x >= 1): optimum x = 1.
  LpResult r = simplex_maximize({{-1}}, {-1}, {-1});
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(-1.0));
}

TEST_CASE("unbounded detection") {
  LpResult r = simplex_maximize({{-1}}, {0}, {1});
  CHECK(r.status == LpStatus::kUnbounded);
}

TEST_CASE("infeasible LP returns a Farkas certificate") {
  // x <= -1 with x >= 0 is infeasible.
  LpResult r = simplex_maximize({{1}}, {-1}, {0});
  REQUIRE(r.status == LpStatus::kInfeasible);
  REQUIRE(r.dual.size() == 1);
  CHECK(r.dual[0] >= 0.0);
  // y >= 0, A^T y >= 0, b^T y < 0.
  CHECK(1.0 * r.dual[0] >= -kLpTol);
  CHECK(-1.0 * r.dual[0] < 0.0);
}

TEST_CASE("feasibility examples and certificates") {
  FeasibilityResult a = solve_feasibility({{1}}, {0});
  CHECK(a.feasible);
  FeasibilityResult b = solve_feasibility({{-1}}, {-1});
  REQUIRE(b.feasible);
  CHECK(b.x[0] >= 1.0 - kLpTol);
  // Over x >= 0, the pair {x <= -1, -x <= -1} is infeasible; the
  // certificate satisfies y >= 0, A^T y >= 0, b^T y < 0.
  FeasibilityResult c = solve_feasibility({{1}, {-1}}, {-1, -1});
  REQUIRE(!c.feasible);
  REQUIRE(c.certificate.size() == 2);
  double at_y = c.certificate[0] - c.certificate[1];
  double bt_y = -c.certificate[0] - c.certificate[1];
  CHECK(c.certificate[0] >= -kLpTol);
  CHECK(c.certificate[1] >= -kLpTol);
  CHECK(at_y >= -1e-7);
  CHECK(bt_y < 0.0);
  // Objective-directed feasibility.
  FeasibilityResult d = solve_feasibility({{1}}, {5}, {1});
  REQUIRE(d.feasible);
  CHECK(d.x[0] == doctest::Approx(5.0));
}

TEST_CASE("matrix game solutions on frozen examples") {
  GameSolution gs = solve_matrix_game({{2, 0}, {1, 3}});
  CHECK(gs.value == doctest::Approx(1.5));
  CHECK(gs.row_strategy.probs[0] == doctest::Approx(0.5));
  CHECK(gs.row_strategy.probs[1] == doctest::Approx(0.5));
  CHECK(gs.col_strategy.probs[0] == doctest::Approx(0.75));
  CHECK(gs.col_strategy.probs[1] == doctest::Approx(0.25));
  CHECK(gs.residual <= 1e-9);

  GameSolution mp = solve_matrix_game({{1, -1}, {-1, 1}});
  CHECK(mp.value == doctest::Approx(0.0));
  CHECK(mp.row_strategy.probs[0] == doctest::Approx(0.5));

  GameSolution rps = solve_matrix_game({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  CHECK(rps.value == doctest::Approx(0.0));
  for (double p : rps.row_strategy.probs)
    CHECK(p == doctest::Approx(1.0 / 3.0));
  for (double p : rps.col_strategy.probs)
    CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("strong duality holds on random rectangular games") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 40);
    const int cols = 2 + static_cast<int>(rng() % 40);
    Mat a(rows, Vec(cols));
    for (auto& r : a)
      for (double& x : r) x = unif(rng);
    GameSolution gs = solve_matrix_game(a);
    // Row strategy guarantees at least the value against every column.
    for (int j = 0; j < cols; ++j) {
      double col_val = 0.0;
      for (int i = 0; i < rows; ++i)
        col_val += gs.row_strategy.probs[i] * a[i][j];
      CHECK(col_val >= gs.value - 1e-7);
    }
    // Column strategy concedes at most the value against every row.
    for (int i = 0; i < rows; ++i) {
      double row_val = 0.0;
      for (int j = 0; j < cols; ++j)
        row_val += gs.col_strategy.probs[j] * a[i][j];
      CHECK(row_val <= gs.value + 1e-7);
    }
    CHECK(gs.residual <= 1e-6);
  }
}

TEST_CASE("population exploitability on RPS populations") {
  Game g = Game::from_payoff({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  PeResult rock = population_exploitability(
      g, Population::from_members({0}, 3));
  CHECK(rock.pe == doctest::Approx(1.0));
  CHECK(rock.full_br == 1);

  PeResult two = population_exploitability(
      g, Population::from_members({0, 1}, 3));
  CHECK(two.pe == doctest::Approx(1.0 / 3.0));
  CHECK(two.least_exploitable.probs[0] == doctest::Approx(1.0 / 3.0));
  CHECK(two.least_exploitable.probs[1] == doctest::Approx(2.0 / 3.0));

  PeResult all = population_exploitability(
      g, Population::from_members({0, 1, 2}, 3));
  CHECK(all.pe == doctest::Approx(0.0));
}

TEST_CASE("PE is monotone under population growth") {
  Game g = generate_game(GameKind::kGaussianSkew, 10, 0.1, 77);
  double prev = 1e100;
  Population pop = Population::from_members({0}, 10);
  for (int k = 1; k < 10; ++k) {
    pop.push(k);
    const double pe = population_exploitability(g, pop).pe;
    CHECK(pe <= prev + 1e-9);
    prev = pe;
  }
  CHECK(prev == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("PE ignores duplicate members") {
  Game g = generate_game(GameKind::kDiscEloNoise, 8, 0.1, 5);
  Population a = Population::from_members({0, 3, 5}, 8);
  Population b = Population::from_members({0, 3, 5, 3, 0, 5, 5}, 8);
  CHECK(population_exploitability(g, a).pe ==
        doctest::Approx(population_exploitability(g, b).pe));
}
