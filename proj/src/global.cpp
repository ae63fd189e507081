#include "psrolab/global.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "psrolab/lp.hpp"
#include "psrolab/rm_br.hpp"

namespace psrolab {

std::string global_mode_name(GlobalMode mode) {
  switch (mode) {
    case GlobalMode::kExactPe: return "exact-pe";
    case GlobalMode::kRmbrPe: return "rmbr-pe";
    case GlobalMode::kRmbrPeUnregularized: return "rmbr-pe-unregularized";
    case GlobalMode::kRandomSelect: return "random-select";
    case GlobalMode::kExploitOnly: return "exploit-only";
  }
  throw DomainError("global_mode_name: bad mode");
}

GlobalMode global_mode_from_name(const std::string& name) {
  if (name == "exact-pe") return GlobalMode::kExactPe;
  if (name == "rmbr-pe") return GlobalMode::kRmbrPe;
  if (name == "rmbr-pe-unregularized") return GlobalMode::kRmbrPeUnregularized;
  if (name == "random-select") return GlobalMode::kRandomSelect;
  if (name == "exploit-only") return GlobalMode::kExploitOnly;
  throw ConfigError("unknown global mode: " + name);
}

std::vector<MixedStrategy> build_pool(const MssSpec& base, const Game& game,
                                      const Population& pop, int k,
                                      std::uint64_t seed, PoolStyle style,
                                      double gamma_ns) {
  if (k < 1) throw DomainError("build_pool: k must be >= 1");
  const int d = pop.effective_size();
  std::vector<MixedStrategy> pool;
  pool.reserve(k);
  pool.push_back(solve_meta(base, game, pop, /*iteration=*/0, seed));
  std::mt19937_64 rng(mix_seed(seed, 0x706f6f6cULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 1; i < k; ++i) {
    // Dirichlet(1) = uniform on the simplex, via normalized exponentials.
    Vec x(d);
    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
      x[j] = -std::log(std::max(unif(rng), 1e-300));
      sum += x[j];
    }
    for (int j = 0; j < d; ++j) x[j] /= sum;
    if (style == PoolStyle::kNeighbor) {
      for (int j = 0; j < d; ++j)
        x[j] = (1.0 - gamma_ns) * pool[0].probs[j] + gamma_ns * x[j];
    }
    pool.push_back(MixedStrategy{std::move(x)});
  }
  return pool;
}

double regularized_score(double pe_est, double p_hat, double prior_pe,
                         double br_vs_prior) {
  if (p_hat < -kProbTol || p_hat > 1.0 + kProbTol)
    throw DomainError("regularized_score: p_hat out of [0,1]");
  return (1.0 - p_hat) * (prior_pe - br_vs_prior) + pe_est;
}

namespace {

struct Candidate {
  MixedStrategy mixture;   // sigma_k over pop.effective
  int response = 0;        // pi_k
  double expanded_pe = 0;  // exact or estimated depending on mode
  int eval_br = 0;         // beta_k
  MixedStrategy eval_mixture;  // rho_k over the expanded effective pop
  double score = 0;
};

}  // namespace

RunRecord run_global_psro(const Game& game, const MssSpec& base, int init,
                          int k, GlobalMode mode, int max_rounds,
                          std::uint64_t seed, const GlobalOptions& options_in) {
  if (init < 0 || init >= game.size())
    throw DomainError("run_global_psro: init out of range");
  if (k < 1) throw DomainError("run_global_psro: k must be >= 1");
  GlobalOptions options = options_in;
  options.mode = mode;

  RunRecord rec;
  rec.label = "global-" + global_mode_name(mode) + "-" + mss_kind_name(base.kind);
  rec.config_snapshot = {{"base", mss_to_json(base)}, {"init", init},
                         {"k", k},   {"mode", global_mode_name(mode)},
                         {"max_rounds", max_rounds}, {"seed", seed}};
  rec.extra["rounds"] = nlohmann::json::array();

  Population pop = Population::from_members({init}, game.size());
  // Random-select still trains and evaluates each candidate with the
  // regret-matching estimator so its interaction budget matches the scored
  // modes; it only discards the scores when choosing.
  const bool rmbr_mode = mode == GlobalMode::kRmbrPe ||
                         mode == GlobalMode::kRmbrPeUnregularized ||
                         mode == GlobalMode::kRandomSelect;

  IterationRecord first;
  first.iter = 0;
  first.pop_size = 1;
  first.effective_size = 1;
  first.pe = population_exploitability(game, pop).pe;
  rec.iterations.push_back(first);
  if (first.pe <= kConvergeTol) {
    rec.converged = true;
    return rec;
  }

  // Regularized-score bookkeeping: the retained restricted-set estimate
  // and mixture from the previously selected candidate.
  double prior_pe = 0.0;
  MixedStrategy prior_rho;
  std::vector<int> prior_domain;
  if (rmbr_mode) {
    const RmBrResult boot = estimate_pe(game, pop, options.rm_steps,
                                        options.samples_per_step,
                                        mix_seed(seed, 0xb007ULL));
    prior_pe = boot.pe_est;
    prior_rho = boot.rho;
    prior_domain = pop.effective;
  }

  int iter = 0;
  for (int round = 1; round <= max_rounds && !rec.converged; ++round) {
    const int k_eff = mode == GlobalMode::kExploitOnly ? 1 : k;
    const auto pool =
        build_pool(base, game, pop, k_eff, mix_seed(seed, 1000 + round),
                   options.pool_style, options.gamma_ns);

    std::vector<Candidate> cands(pool.size());
    for (std::size_t c = 0; c < pool.size(); ++c) {
      cands[c].mixture = pool[c];
      cands[c].response = best_response(game, pool[c], pop.effective).index;
      Population plus = pop;
      plus.push(cands[c].response);
      if (rmbr_mode) {
        const RmBrResult est =
            estimate_pe(game, plus, options.rm_steps, options.samples_per_step,
                        mix_seed(seed, 7919ULL * round + c));
        cands[c].expanded_pe = est.pe_est;
        cands[c].eval_br = est.beta;
        cands[c].eval_mixture = est.rho;
        // p_hat: mass the evaluation mixture puts on the candidate response.
        double p_hat = 0.0;
        for (int j = 0; j < plus.effective_size(); ++j) {
          if (plus.effective[j] == cands[c].response) {
            p_hat = est.rho.probs[j];
            break;
          }
        }
        p_hat = std::clamp(p_hat, 0.0, 1.0);
        if (mode == GlobalMode::kRmbrPe) {
          const double br_vs_prior =
              payoff_vs_mixture(game, est.beta, prior_rho, prior_domain);
          cands[c].score = regularized_score(est.pe_est, p_hat, prior_pe,
                                             std::min(br_vs_prior, prior_pe));
        } else {
          cands[c].score = est.pe_est;
        }
      } else {
        const PeResult per = population_exploitability(game, plus);
        cands[c].expanded_pe = per.pe;
        cands[c].eval_br = per.full_br;
        cands[c].eval_mixture = per.least_exploitable;
        cands[c].score = per.pe;
      }
    }

    std::size_t chosen = 0;
    if (mode == GlobalMode::kRandomSelect) {
      std::mt19937_64 rng(mix_seed(seed, 5000 + round));
      chosen = std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng);
    } else {
      double best = cands[0].score;
      for (const auto& c : cands) best = std::min(best, c.score);
      // Conservative tie-breaking: prefer the base-MSS candidate among
      // near-minimal scores, else the lowest pool index.
      if (cands[0].score <= best + kTieTol) {
        chosen = 0;
      } else {
        for (std::size_t c = 1; c < cands.size(); ++c) {
          if (cands[c].score <= best + kTieTol) {
            chosen = c;
            break;
          }
        }
      }
    }
    const Candidate& sel = cands[chosen];

    nlohmann::json round_row;
    round_row["round"] = round;
    round_row["chosen"] = chosen;
    {
      nlohmann::json scores = nlohmann::json::array();
      nlohmann::json responses = nlohmann::json::array();
      nlohmann::json betas = nlohmann::json::array();
      for (const auto& c : cands) {
        scores.push_back(c.score);
        responses.push_back(c.response);
        betas.push_back(c.eval_br);
      }
      round_row["scores"] = scores;
      round_row["responses"] = responses;
      round_row["betas"] = betas;
    }
    rec.extra["rounds"].push_back(round_row);

    // Dual expansion: the selected exploratory response, then its
    // evaluation best response (two PSRO-style iterations).
    for (const int addition : {sel.response, sel.eval_br}) {
      pop.push(addition);
      IterationRecord r;
      r.iter = ++iter;
      r.added_strategy = addition;
      r.pop_size = static_cast<int>(pop.members.size());
      r.effective_size = pop.effective_size();
      r.pe = population_exploitability(game, pop).pe;
      r.meta_strategy =
          addition == sel.response ? sel.mixture.probs : sel.eval_mixture.probs;
      rec.iterations.push_back(r);
      if (r.pe <= kConvergeTol) {
        rec.converged = true;
        break;
      }
    }

    if (rmbr_mode) {
      prior_pe = sel.expanded_pe;
      // The retained mixture lives on the selected expanded population,
      // which is a prefix of the current effective list; pad with zeros.
      prior_rho = sel.eval_mixture;
      prior_domain = pop.effective;
      prior_rho.probs.resize(prior_domain.size(), 0.0);
    }
  }
  return rec;
}

}  // namespace psrolab
