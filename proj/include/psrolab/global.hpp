// The exploration-selection framework (Global PSRO): Dirichlet mixture
// pools, per-candidate post-expansion PE, regularized scoring, conservative
// tie-breaking, and dual expansion.
#ifndef PSROLAB_GLOBAL_HPP_
#define PSROLAB_GLOBAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "psrolab/game.hpp"
#include "psrolab/meta.hpp"
#include "psrolab/psro.hpp"

namespace psrolab {

enum class GlobalMode {
  kExactPe,
  kRmbrPe,
  kRmbrPeUnregularized,
  kRandomSelect,
  kExploitOnly,
};

std::string global_mode_name(GlobalMode mode);
GlobalMode global_mode_from_name(const std::string& name);

enum class PoolStyle { kDirichlet, kNeighbor };

struct GlobalOptions {
  GlobalMode mode = GlobalMode::kExactPe;
  PoolStyle pool_style = PoolStyle::kDirichlet;
  double gamma_ns = 0.3;  // neighbor-search mixing weight
  int rm_steps = 1000;
  int samples_per_step = 0;
};

// Pool element 0 is always solve_meta(base, ...); elements 1..k-1 are
// Dirichlet(1) samples over pop.effective (optionally mixed toward the base
// mixture in the neighbor-search variant).
std::vector<MixedStrategy> build_pool(const MssSpec& base, const Game& game,
                                      const Population& pop, int k,
                                      std::uint64_t seed,
                                      PoolStyle style = PoolStyle::kDirichlet,
                                      double gamma_ns = 0.3);

// Regularized candidate score: (1 - p_hat) * (prior_pe - br_vs_prior) + pe_est.
double regularized_score(double pe_est, double p_hat, double prior_pe,
                         double br_vs_prior);

// Runs the framework for at most max_rounds rounds (two PSRO-style
// iterations each).  PE is recorded exactly after every addition.
RunRecord run_global_psro(const Game& game, const MssSpec& base, int init,
                          int k, GlobalMode mode, int max_rounds,
                          std::uint64_t seed,
                          const GlobalOptions& options = GlobalOptions());

}  // namespace psrolab

#endif  // PSROLAB_GLOBAL_HPP_
