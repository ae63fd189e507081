#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "psrolab/game.hpp"
#include "psrolab/landscape.hpp"
#include "psrolab/lp.hpp"

using namespace psrolab;

namespace {
Game rps() {
  return Game::from_payoff({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
}
}  // namespace

TEST_CASE("landscape lattice size and header") {
  Game g = rps();
  Population pop = Population::from_members({0, 1, 2}, 3);
  auto grid = pe_landscape(g, pop, 4);
  CHECK(grid.size() == 15);  // C(4+2, 2) barycentric lattice points
  for (const auto& pt : grid) {
    CHECK(pt.p0 + pt.p1 + pt.p2 == doctest::Approx(1.0));
    CHECK(pt.post_expansion_pe >= -1e-12);
  }
  std::istringstream in(landscape_csv(grid));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "p0,p1,p2,pe,br");
  int count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == int(grid.size()));
}

TEST_CASE("on RPS every expansion of the full population is solved") {
  // The population already spans the game, so the post-expansion PE is 0
  // everywhere on the lattice.
  Game g = rps();
  Population pop = Population::from_members({0, 1, 2}, 3);
  for (const auto& pt : pe_landscape(g, pop, 6)) {
    CHECK(pt.post_expansion_pe <= 1e-9);
    CHECK(pt.br_index >= 0);
    CHECK(pt.br_index < 3);
  }
}

TEST_CASE("landscape rejects populations that are not 3-effective") {
  Game g = rps();
  CHECK_THROWS_AS(pe_landscape(g, Population::from_members({0, 1}, 3), 4),
                  DomainError);
  CHECK_THROWS_AS(
      pe_landscape(g, Population::from_members({0, 1, 2}, 3), 1),
      DomainError);
}

TEST_CASE("radius oracles") {
  Game g = Game::from_payoff({{0, -1}, {1, 0}});
  SUBCASE("singleton population") {
    Population pop = Population::from_members({0}, 2);
    BrRadiusResult r = unique_br_radius(g, pop, MixedStrategy{{1.0}});
    CHECK(r.br == 1);
    REQUIRE(r.radius.has_value());
    CHECK(*r.radius == doctest::Approx(0.5));  // gap 1, diff norm 1
  }
  SUBCASE("two-member population") {
    Population pop = Population::from_members({0, 1}, 2);
    BrRadiusResult r = unique_br_radius(g, pop, MixedStrategy{{1.0, 0.0}});
    CHECK(r.br == 1);
    REQUIRE(r.radius.has_value());
    // gap 1, diff vector (1,1): radius = 1 / (2 * sqrt(2)).
    CHECK(*r.radius == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
  }
  SUBCASE("tied best response has no radius") {
    Game zero = Game::from_payoff({{0, 0}, {0, 0}});
    Population pop = Population::from_members({0, 1}, 2);
    BrRadiusResult r = unique_br_radius(zero, pop, MixedStrategy{{0.5, 0.5}});
    CHECK_FALSE(r.radius.has_value());
  }
  SUBCASE("trivial game has infinite radius") {
    Game one = Game::from_payoff({{0}});
    Population pop = Population::from_members({0}, 1);
    BrRadiusResult r = unique_br_radius(one, pop, MixedStrategy{{1.0}});
    REQUIRE(r.radius.has_value());
    CHECK(std::isinf(*r.radius));
  }
}

TEST_CASE("perturbations inside the radius keep the best response") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Game g = generate_game(GameKind::kGaussianSkew, 6, 0.3, 300 + trial);
    Population pop = Population::from_members({0, 2, 4}, 6);
    MixedStrategy sigma{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
    BrRadiusResult r = unique_br_radius(g, pop, sigma);
    if (!r.radius || !std::isfinite(*r.radius) || *r.radius <= 0) continue;
    for (int p = 0; p < 10; ++p) {
      // Tangent direction (sums to zero) of norm 0.99 * radius.
      Vec z(3);
      double mean = 0;
      for (double& v : z) mean += (v = gauss(rng));
      mean /= 3;
      double norm = 0;
      for (double& v : z) {
        v -= mean;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;
      MixedStrategy moved = sigma;
      bool ok = true;
      for (int j = 0; j < 3; ++j) {
        moved.probs[j] += z[j] / norm * 0.99 * *r.radius;
        if (moved.probs[j] < 0) ok = false;
      }
      if (!ok) continue;
      CHECK(best_response(g, moved, pop.effective).index == r.br);
      ++checked;
    }
  }
  CHECK(checked > 50);
}
