// Adversarial instance construction: for a target RGB meta-solver, builds a
// skew-symmetric game on which that solver exhibits worst-case PSRO
// behavior, together with a scripted shortcut solver that reaches the
// equilibrium in min{s+2, n-1} iterations, and the stricter instances used
// by the framework's expected-iteration bound.
#ifndef PSROLAB_FORGE_HPP_
#define PSROLAB_FORGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "psrolab/game.hpp"
#include "psrolab/meta.hpp"

namespace psrolab {

struct ForgeLogEntry {
  int step = 0;             // PSRO iteration index during construction
  std::string case_taken;   // first | reuse | extend | b-step | case2 | case3
                            // | final | pinned-c
  double e = 0.0;           // best payoff against the current meta-mixture
  double eps = 0.0;         // protection threshold (min over prior mixtures)
  double v = 0.0;           // shortcut exploitability (0 before the core)
  double delta = 0.0;
  double delta_prime = 0.0;
  double alpha = 0.0;
  double eps_prime = 0.0;
  double min_margin = 0.0;  // smallest strict-inequality slack of the step
  std::string lp_status;
  int added = -1;
  bool surrogate = false;
};

struct ForgeResult {
  Game game;
  MssSpec shortcut;  // scripted solver replaying to the equilibrium
  std::vector<int> equilibrium_support;
  std::vector<ForgeLogEntry> construction_log;
  MssSpec target_spec;
  bool target_non_convergent = false;  // construction finished via surrogate
  int init = 0;
};

// Worst-case instance forged against `target`: the game keeps the target
// meta-solver exploitable for roughly n iterations (single-strategy
// equilibrium support).
ForgeResult forge_worst_case(const MssSpec& target, int n, int init,
                             std::uint64_t seed);

// Worst-case instance with an s-strategy equilibrium support and a
// scripted shortcut solver converging within min{s+2, n-1} iterations.
// s must be odd; s > 1 additionally requires n >= s + 4.
ForgeResult forge_with_shortcut(const MssSpec& target, int n, int s, int init,
                                std::uint64_t seed);

// forge_with_shortcut output additionally satisfying the hard-instance
// conditions: prefix best-response confinement via pinned payoffs
// (c = 0.95, later entries capped at 0.9), internal equilibrium block
// smaller in magnitude than the minimum cross payoff, and nondegenerate
// equilibrium-subset subgames.
ForgeResult forge_theorem4_instance(const MssSpec& target, int n, int s,
                                    std::uint64_t seed);

// True iff the subgame on `support` (and each nonempty subset when
// |support| <= 6, else sampled subsets) has a unique NE: the LP solution is
// stable under objective perturbation and the support's square indifference
// system has full rank.
bool nondegeneracy_check(const Game& game, const std::vector<int>& support);

}  // namespace psrolab

#endif  // PSROLAB_FORGE_HPP_
