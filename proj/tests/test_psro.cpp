#include <sstream>

#include "doctest.h"
#include "psrolab/game.hpp"
#include "psrolab/lp.hpp"
#include "psrolab/meta.hpp"
#include "psrolab/psro.hpp"

using namespace psrolab;

namespace {
Game rps() {
  return Game::from_payoff({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
}

MssSpec nash_spec() {
  MssSpec s;
  s.kind = MssKind::kNash;
  return s;
}
}  // namespace

TEST_CASE("nash PSRO on RPS records the exact PE trajectory") {
  RunRecord rec = run_psro(rps(), nash_spec(), 0, 20, 7);
  CHECK(rec.converged);
  REQUIRE(rec.iterations.size() == 3);  // initial record + two additions
  CHECK(rec.iterations[0].pe == doctest::Approx(1.0));
  CHECK(rec.iterations[1].pe == doctest::Approx(1.0 / 3.0));
  CHECK(rec.iterations[2].pe <= 1e-9);
  CHECK(rec.iterations[0].added_strategy == -1);
  CHECK(rec.iterations[0].effective_size == 1);
  CHECK(rec.iterations[2].effective_size == 3);
  for (std::size_t i = 0; i < rec.iterations.size(); ++i)
    CHECK(rec.iterations[i].iter == int(i));
}

TEST_CASE("a dominant pure equilibrium converges in one addition") {
  Game g = Game::from_payoff({{0, -1}, {1, 0}});
  RunRecord rec = run_psro(g, nash_spec(), 0, 10, 1);
  CHECK(rec.converged);
  REQUIRE(rec.iterations.size() == 2);
  CHECK(rec.iterations[1].added_strategy == 1);
  CHECK(rec.iterations[1].pe <= 1e-9);
}

TEST_CASE("duplicate additions count as iterations but not effective growth") {
  // Uniform meta-strategy on RPS starting from {rock}: BR(rock) = paper,
  // then BR(uniform over {rock,paper}) = paper again, forever.
  MssSpec spec;
  spec.kind = MssKind::kUniform;
  RunRecord rec = run_psro(rps(), spec, 0, 6, 3);
  CHECK_FALSE(rec.converged);
  REQUIRE(rec.iterations.size() == 7);
  for (std::size_t i = 2; i < rec.iterations.size(); ++i) {
    CHECK(rec.iterations[i].added_strategy == 1);
    CHECK(rec.iterations[i].effective_size == 2);
    CHECK(rec.iterations[i].pop_size == int(i) + 1);
    CHECK(rec.iterations[i].pe == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("the meta-strategy recorded each iteration sums to one") {
  Game g = generate_game(GameKind::kGaussianSkew, 7, 0.1, 17);
  RunRecord rec = run_psro(g, nash_spec(), 2, 10, 5);
  CHECK(rec.iterations[0].meta_strategy.empty());
  for (std::size_t i = 1; i < rec.iterations.size(); ++i) {
    double s = 0;
    for (double v : rec.iterations[i].meta_strategy) s += v;
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("run records survive a JSON roundtrip") {
  RunRecord rec = run_psro(rps(), nash_spec(), 1, 20, 9);
  RunRecord back = run_from_json(run_to_json(rec));
  CHECK(back.label == rec.label);
  CHECK(back.converged == rec.converged);
  REQUIRE(back.iterations.size() == rec.iterations.size());
  for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
    CHECK(back.iterations[i].pe == rec.iterations[i].pe);
    CHECK(back.iterations[i].added_strategy ==
          rec.iterations[i].added_strategy);
    CHECK(back.iterations[i].meta_strategy == rec.iterations[i].meta_strategy);
  }
  CHECK(back.config_snapshot == rec.config_snapshot);
}

TEST_CASE("trajectory CSV has the fixed header and one line per iteration") {
  RunRecord rec = run_psro(rps(), nash_spec(), 0, 20, 2);
  std::istringstream in(trajectory_csv(rec));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "iter,pe,effective_size");
  int count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == int(rec.iterations.size()));
}

TEST_CASE("identical configs give byte-identical trajectories") {
  Game g = generate_game(GameKind::kDiscEloNoise, 12, 0.2, 42);
  MssSpec spec;
  spec.kind = MssKind::kPrd;
  RunRecord a = run_psro(g, spec, 0, 15, 8);
  RunRecord b = run_psro(g, spec, 0, 15, 8);
  CHECK(trajectory_csv(a) == trajectory_csv(b));
}

TEST_CASE("the config snapshot names the solver") {
  RunRecord rec = run_psro(rps(), nash_spec(), 0, 5, 1);
  REQUIRE(rec.config_snapshot.contains("mss"));
  CHECK(rec.config_snapshot["mss"]["kind"] == "nash");
}
