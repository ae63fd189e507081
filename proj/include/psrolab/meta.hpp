// Meta-strategy solvers: the RGB-MSS family (nash / uniform / prd /
// alpharank), the Anytime solvers (exact and RM-BR estimated), and scripted
// instance-specific solvers emitted by the adversarial forge.
#ifndef PSROLAB_META_HPP_
#define PSROLAB_META_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "psrolab/common.hpp"
#include "psrolab/game.hpp"

#include "json.hpp"

namespace psrolab {

enum class MssKind {
  kNash,
  kUniform,
  kPrd,
  kAlphaRank,
  kAnytimeExact,
  kAnytimeRmbr,
  kScripted,
};

std::string mss_kind_name(MssKind kind);
MssKind mss_kind_from_name(const std::string& name);

// True for solvers that read only the restricted payoff matrix.
bool is_rgb_kind(MssKind kind);

struct MssSpec {
  MssKind kind = MssKind::kNash;

  // PRD parameters.
  double prd_step_size = 1e-3;
  int prd_steps = 50000;
  double prd_exploration_floor = 1e-3;

  // AlphaRank parameters.
  double alpharank_alpha = 50.0;
  double alpharank_perturbation = 1e-6;

  // Anytime-RMBR parameters.
  int rm_steps = 1000;
  int samples_per_step = 0;  // 0 = exact payoffs

  // Scripted solver: mixture for iteration t is mixtures[t-1], zero-padded
  // to the current effective size; past the end the fallback kind is used.
  std::vector<Vec> scripted_mixtures;
  std::string scripted_fallback = "nash";

  static MssSpec of(MssKind kind) {
    MssSpec s;
    s.kind = kind;
    return s;
  }
};

nlohmann::json mss_to_json(const MssSpec& spec);
// Strict parser: unknown keys are rejected with ConfigError.
MssSpec mss_from_json(const nlohmann::json& j);

// Computes the meta-strategy over pop.effective for the given iteration.
// RGB kinds read only the effective restricted submatrix; anytime kinds
// additionally read full-game payoffs.
MixedStrategy solve_meta(const MssSpec& spec, const Game& game,
                         const Population& pop, int iteration,
                         std::uint64_t seed);

}  // namespace psrolab

#endif  // PSROLAB_META_HPP_
