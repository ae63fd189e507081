// The baseline PSRO loop with an exact best-response oracle and
// per-iteration Population-Exploitability recording.
#ifndef PSROLAB_PSRO_HPP_
#define PSROLAB_PSRO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "psrolab/game.hpp"
#include "psrolab/meta.hpp"

#include "json.hpp"

namespace psrolab {

struct IterationRecord {
  int iter = 0;
  int added_strategy = -1;  // -1 for the initial record
  int pop_size = 0;
  int effective_size = 0;
  double pe = 0.0;
  Vec meta_strategy;     // mixture that produced the addition (empty at iter 0)
  double wall_time = 0;  // seconds; excluded from determinism comparisons
};

struct RunRecord {
  std::string label;
  bool converged = false;
  std::vector<IterationRecord> iterations;
  nlohmann::json config_snapshot;
  nlohmann::json extra;  // per-round candidate tables for global runs
};

// Runs PSRO: sigma <- solve_meta, pi <- best_response(sigma), append pi
// (duplicates allowed; they collapse only in the effective view).  Stops
// when PE <= kConvergeTol or after max_iters additions.
RunRecord run_psro(const Game& game, const MssSpec& spec, int init,
                   int max_iters, std::uint64_t seed);

nlohmann::json run_to_json(const RunRecord& rec);
RunRecord run_from_json(const nlohmann::json& j);

// CSV trajectory: header "iter,pe,effective_size", LF line endings,
// %.17g doubles — byte-identical across reruns of the same config.
std::string trajectory_csv(const RunRecord& rec);

}  // namespace psrolab

#endif  // PSROLAB_PSRO_HPP_
