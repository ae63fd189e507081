// RM-BR Population-Exploitability estimation: Exp3-style exponential
// weights over the population against a tracking exact best response.
#ifndef PSROLAB_RM_BR_HPP_
#define PSROLAB_RM_BR_HPP_

#include <cstdint>

#include "psrolab/common.hpp"
#include "psrolab/game.hpp"

namespace psrolab {

struct RmBrResult {
  double pe_est = 0.0;
  MixedStrategy rho;  // mixture over pop.effective, floor gamma/|effective|
  int beta = 0;       // tracking best response against the final mixture
  double gamma = 0.0;  // exploration rate used
  double eta = 0.0;    // learning rate used
};

// Runs `rm_steps` exponential-weight updates.  Losses are the payoffs
// conceded to the tracking best response.  With samples_per_step == 0 the
// payoffs are exact and the run is fully deterministic given the seed;
// otherwise each loss is the mean of samples_per_step Bernoulli payoff
// observations with matching expectation.  rho is the average of the
// per-step mixtures over the final 10% of steps (the iterate the
// no-regret guarantee covers); pe_est = U(beta, rho) with beta the exact
// best response to that averaged mixture.
RmBrResult estimate_pe(const Game& game, const Population& pop, int rm_steps,
                       int samples_per_step, std::uint64_t seed);

}  // namespace psrolab

#endif  // PSROLAB_RM_BR_HPP_
