#include "psrolab/rm_br.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace psrolab {

RmBrResult estimate_pe(const Game& game, const Population& pop, int rm_steps,
                       int samples_per_step, std::uint64_t seed) {
  if (rm_steps < 1) throw DomainError("estimate_pe: rm_steps must be >= 1");
  if (samples_per_step < 0)
    throw DomainError("estimate_pe: samples_per_step must be >= 0");
  const int d = pop.effective_size();
  if (d == 0) throw DomainError("estimate_pe: empty population");

  double bound = 0.0;
  for (const auto& row : game.payoff)
    for (double v : row) bound = std::max(bound, std::abs(v));
  if (bound == 0.0) bound = 1.0;

  RmBrResult res;
  res.gamma = d > 1 ? std::min(1.0, std::sqrt(d * std::log(double(d)) / rm_steps)) : 0.0;
  res.eta = res.gamma / d;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vec logw(d, 0.0);
  MixedStrategy rho;
  rho.probs.assign(d, 0.0);
  const int tail_start = rm_steps - std::max(1, rm_steps / 10);
  Vec tail_rho(d, 0.0);
  int tail_count = 0;

  for (int t = 0; t < rm_steps; ++t) {
    // Mixture: weight-proportional distribution mixed with the exploration
    // floor, so every coordinate is >= gamma/d.
    double lmax = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (int i = 0; i < d; ++i) z += std::exp(logw[i] - lmax);
    for (int i = 0; i < d; ++i) {
      rho.probs[i] = (1.0 - res.gamma) * std::exp(logw[i] - lmax) / z +
                     res.gamma / d;
    }
    const BestResponse br = best_response(game, rho, pop.effective);
    const int beta = br.index;
    if (t >= tail_start) {
      for (int i = 0; i < d; ++i) tail_rho[i] += rho.probs[i];
      ++tail_count;
    }
    // Exponential-weight update on rewards in [0,1]; the reward of a
    // member is high when it concedes little to the tracking BR.
    for (int i = 0; i < d; ++i) {
      double loss = game.payoff[beta][pop.effective[i]];
      if (samples_per_step > 0) {
        // Bernoulli payoff observations: +/-bound with matching mean.
        const double p_win = 0.5 * (1.0 + loss / bound);
        int wins = 0;
        for (int s = 0; s < samples_per_step; ++s)
          if (unif(rng) < p_win) ++wins;
        loss = bound * (2.0 * double(wins) / samples_per_step - 1.0);
      }
      const double reward = (bound - loss) / (2.0 * bound);
      logw[i] += res.eta * reward;
    }
  }
  // The no-regret guarantee applies to the averaged mixture: on populations
  // with interior equilibria the per-step mixture orbits instead of
  // converging, so evaluate against the tail average.
  for (int i = 0; i < d; ++i) rho.probs[i] = tail_rho[i] / tail_count;
  const BestResponse final_br = best_response(game, rho, pop.effective);
  res.pe_est = final_br.value;
  res.rho = rho;
  res.beta = final_br.index;
  return res;
}

}  // namespace psrolab
