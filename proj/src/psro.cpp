#include "psrolab/psro.hpp"

#include <chrono>
#include <cstdio>

#include "psrolab/lp.hpp"

namespace psrolab {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RunRecord run_psro(const Game& game, const MssSpec& spec, int init,
                   int max_iters, std::uint64_t seed) {
  if (init < 0 || init >= game.size())
    throw DomainError("run_psro: init out of range");
  if (max_iters < 0) throw DomainError("run_psro: max_iters must be >= 0");

  RunRecord rec;
  rec.label = mss_kind_name(spec.kind);
  rec.config_snapshot = {{"mss", mss_to_json(spec)},
                         {"init", init},
                         {"max_iters", max_iters},
                         {"seed", seed}};
  Population pop = Population::from_members({init}, game.size());

  const double t0 = now_seconds();
  IterationRecord first;
  first.iter = 0;
  first.pop_size = 1;
  first.effective_size = 1;
  first.pe = population_exploitability(game, pop).pe;
  first.wall_time = now_seconds() - t0;
  rec.iterations.push_back(first);
  if (first.pe <= kConvergeTol) {
    rec.converged = true;
    return rec;
  }

  for (int iter = 1; iter <= max_iters; ++iter) {
    const double ts = now_seconds();
    const MixedStrategy sigma = solve_meta(spec, game, pop, iter, seed);
    const BestResponse br = best_response(game, sigma, pop.effective);
    pop.push(br.index);
    IterationRecord r;
    r.iter = iter;
    r.added_strategy = br.index;
    r.pop_size = static_cast<int>(pop.members.size());
    r.effective_size = pop.effective_size();
    r.pe = population_exploitability(game, pop).pe;
    r.meta_strategy = sigma.probs;
    r.wall_time = now_seconds() - ts;
    rec.iterations.push_back(r);
    if (r.pe <= kConvergeTol) {
      rec.converged = true;
      break;
    }
  }
  return rec;
}

nlohmann::json run_to_json(const RunRecord& rec) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["label"] = rec.label;
  j["converged"] = rec.converged;
  j["config_snapshot"] = rec.config_snapshot;
  if (!rec.extra.is_null()) j["extra"] = rec.extra;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : rec.iterations) {
    j["iterations"].push_back({{"iter", it.iter},
                               {"added_strategy", it.added_strategy},
                               {"pop_size", it.pop_size},
                               {"effective_size", it.effective_size},
                               {"pe", it.pe},
                               {"meta_strategy", it.meta_strategy},
                               {"wall_time", it.wall_time}});
  }
  return j;
}

RunRecord run_from_json(const nlohmann::json& j) {
  RunRecord rec;
  rec.label = j.value("label", "");
  rec.converged = j.value("converged", false);
  if (j.contains("config_snapshot")) rec.config_snapshot = j.at("config_snapshot");
  if (j.contains("extra")) rec.extra = j.at("extra");
  for (const auto& e : j.at("iterations")) {
    IterationRecord it;
    it.iter = e.at("iter").get<int>();
    it.added_strategy = e.at("added_strategy").get<int>();
    it.pop_size = e.at("pop_size").get<int>();
    it.effective_size = e.at("effective_size").get<int>();
    it.pe = e.at("pe").get<double>();
    it.meta_strategy = e.value("meta_strategy", Vec{});
    it.wall_time = e.value("wall_time", 0.0);
    rec.iterations.push_back(it);
  }
  return rec;
}

std::string trajectory_csv(const RunRecord& rec) {
  std::string out = "iter,pe,effective_size\n";
  char buf[64];
  for (const auto& it : rec.iterations) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d\n", it.iter, it.pe,
                  it.effective_size);
    out += buf;
  }
  return out;
}

}  // namespace psrolab
