#include "psrolab/meta.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "psrolab/lp.hpp"
#include "psrolab/rm_br.hpp"

namespace psrolab {

std::string mss_kind_name(MssKind kind) {
  switch (kind) {
    case MssKind::kNash: return "nash";
    case MssKind::kUniform: return "uniform";
    case MssKind::kPrd: return "prd";
    case MssKind::kAlphaRank: return "alpharank";
    case MssKind::kAnytimeExact: return "anytime-exact";
    case MssKind::kAnytimeRmbr: return "anytime-rmbr";
    case MssKind::kScripted: return "scripted";
  }
  throw DomainError("mss_kind_name: bad kind");
}

MssKind mss_kind_from_name(const std::string& name) {
  if (name == "nash") return MssKind::kNash;
  if (name == "uniform") return MssKind::kUniform;
  if (name == "prd") return MssKind::kPrd;
  if (name == "alpharank") return MssKind::kAlphaRank;
  if (name == "anytime-exact") return MssKind::kAnytimeExact;
  if (name == "anytime-rmbr") return MssKind::kAnytimeRmbr;
  if (name == "scripted") return MssKind::kScripted;
  throw ConfigError("unknown MSS kind: " + name);
}

bool is_rgb_kind(MssKind kind) {
  return kind == MssKind::kNash || kind == MssKind::kUniform ||
         kind == MssKind::kPrd || kind == MssKind::kAlphaRank;
}

nlohmann::json mss_to_json(const MssSpec& spec) {
  nlohmann::json j;
  j["kind"] = mss_kind_name(spec.kind);
  switch (spec.kind) {
    case MssKind::kPrd:
      j["step_size"] = spec.prd_step_size;
      j["steps"] = spec.prd_steps;
      j["exploration_floor"] = spec.prd_exploration_floor;
      break;
    case MssKind::kAlphaRank:
      j["alpha"] = spec.alpharank_alpha;
      j["perturbation"] = spec.alpharank_perturbation;
      break;
    case MssKind::kAnytimeRmbr:
      j["rm_steps"] = spec.rm_steps;
      j["samples_per_step"] = spec.samples_per_step;
      break;
    case MssKind::kScripted:
      j["mixtures"] = spec.scripted_mixtures;
      j["fallback"] = spec.scripted_fallback;
      break;
    default:
      break;
  }
  return j;
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.count(it.key()) == 0)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

MssSpec mss_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("MSS spec must be an object with a 'kind' key");
  MssSpec spec;
  spec.kind = mss_kind_from_name(j.at("kind").get<std::string>());
  switch (spec.kind) {
    case MssKind::kPrd:
      check_keys(j, {"kind", "step_size", "steps", "exploration_floor"}, "prd spec");
      if (j.contains("step_size")) spec.prd_step_size = j.at("step_size").get<double>();
      if (j.contains("steps")) spec.prd_steps = j.at("steps").get<int>();
      if (j.contains("exploration_floor"))
        spec.prd_exploration_floor = j.at("exploration_floor").get<double>();
      break;
    case MssKind::kAlphaRank:
      check_keys(j, {"kind", "alpha", "perturbation"}, "alpharank spec");
      if (j.contains("alpha")) spec.alpharank_alpha = j.at("alpha").get<double>();
      if (j.contains("perturbation"))
        spec.alpharank_perturbation = j.at("perturbation").get<double>();
      break;
    case MssKind::kAnytimeRmbr:
      check_keys(j, {"kind", "rm_steps", "samples_per_step"}, "anytime-rmbr spec");
      if (j.contains("rm_steps")) spec.rm_steps = j.at("rm_steps").get<int>();
      if (j.contains("samples_per_step"))
        spec.samples_per_step = j.at("samples_per_step").get<int>();
      break;
    case MssKind::kScripted:
      check_keys(j, {"kind", "mixtures", "fallback"}, "scripted spec");
      if (!j.contains("mixtures"))
        throw ConfigError("scripted spec requires 'mixtures'");
      spec.scripted_mixtures = j.at("mixtures").get<std::vector<Vec>>();
      if (j.contains("fallback"))
        spec.scripted_fallback = j.at("fallback").get<std::string>();
      break;
    default:
      check_keys(j, {"kind"}, "mss spec");
      break;
  }
  return spec;
}

namespace {

Mat restricted_matrix(const Game& game, const Population& pop) {
  const int d = pop.effective_size();
  Mat a(d, Vec(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      a[i][j] = game.payoff[pop.effective[i]][pop.effective[j]];
  return a;
}

// Euclidean projection onto {x : sum x = 1, x_i >= floor}.
Vec project_with_floor(const Vec& x, double floor) {
  const int d = static_cast<int>(x.size());
  if (floor * d >= 1.0) return Vec(d, 1.0 / d);
  Vec w(d);
  for (int i = 0; i < d; ++i) w[i] = x[i] - floor;
  const double mass = 1.0 - floor * d;
  // Project w onto the simplex scaled to total `mass`.
  Vec sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int i = 0; i < d; ++i) {
    cum += sorted[i];
    const double t = (cum - mass) / (i + 1);
    if (sorted[i] - t > 0.0) tau = t;
  }
  Vec out(d);
  for (int i = 0; i < d; ++i) out[i] = std::max(0.0, w[i] - tau) + floor;
  return out;
}

MixedStrategy solve_prd(const Mat& a, const MssSpec& spec) {
  const int d = static_cast<int>(a.size());
  Vec x(d, 1.0 / d);
  for (int t = 0; t < spec.prd_steps; ++t) {
    Vec ax(d, 0.0);
    for (int i = 0; i < d; ++i) {
      const Vec& row = a[i];
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += row[j] * x[j];
      ax[i] = s;
    }
    double avg = 0.0;
    for (int i = 0; i < d; ++i) avg += x[i] * ax[i];
    for (int i = 0; i < d; ++i) x[i] += spec.prd_step_size * x[i] * (ax[i] - avg);
    x = project_with_floor(x, spec.prd_exploration_floor);
  }
  return MixedStrategy{x};
}

MixedStrategy solve_alpharank(const Mat& a, const MssSpec& spec) {
  const int d = static_cast<int>(a.size());
  if (d == 1) return point_mass(1, 0);
  // Single-population response chain: from state i, a challenger j is drawn
  // uniformly and takes over with logistic probability in the payoff gap
  // A[j][i] - A[i][j], scaled by the selection intensity.
  Mat t(d, Vec(d, 0.0));
  for (int i = 0; i < d; ++i) {
    double stay = 1.0;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const double gap = a[j][i] - a[i][j];
      const double p = 1.0 / (1.0 + std::exp(-spec.alpharank_alpha * gap));
      t[i][j] = p / (d - 1);
      stay -= t[i][j];
    }
    t[i][i] = stay;
  }
  const double pert = spec.alpharank_perturbation;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t[i][j] = (1.0 - pert) * t[i][j] + pert / d;
  Vec x(d, 1.0 / d);
  for (int it = 0; it < 1000000; ++it) {
    Vec y(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) y[j] += x[i] * t[i][j];
    double diff = 0.0, sum = 0.0;
    for (int j = 0; j < d; ++j) sum += y[j];
    for (int j = 0; j < d; ++j) y[j] /= sum;
    for (int j = 0; j < d; ++j) diff += std::abs(y[j] - x[j]);
    x = std::move(y);
    if (diff <= 1e-12) break;
  }
  return MixedStrategy{x};
}

MixedStrategy solve_scripted(const MssSpec& spec, const Game& game,
                             const Population& pop, int iteration,
                             std::uint64_t seed) {
  const int d = pop.effective_size();
  const int idx = iteration - 1;
  if (idx >= 0 && idx < static_cast<int>(spec.scripted_mixtures.size())) {
    const Vec& stored = spec.scripted_mixtures[idx];
    if (static_cast<int>(stored.size()) > d)
      throw SpecError("scripted mixture longer than current effective population");
    MixedStrategy m;
    m.probs = stored;
    m.probs.resize(d, 0.0);  // zero-pad to the current effective size
    if (!m.valid()) throw SpecError("scripted mixture is not a valid mixture");
    return m;
  }
  if (spec.scripted_fallback.empty())
    throw SpecError("scripted solver exhausted with no fallback");
  MssSpec fb = MssSpec::of(mss_kind_from_name(spec.scripted_fallback));
  return solve_meta(fb, game, pop, iteration, seed);
}

}  // namespace

MixedStrategy solve_meta(const MssSpec& spec, const Game& game,
                         const Population& pop, int iteration,
                         std::uint64_t seed) {
  const int d = pop.effective_size();
  if (d == 0) throw DomainError("solve_meta: empty population");
  switch (spec.kind) {
    case MssKind::kUniform:
      return uniform_mixture(d);
    case MssKind::kNash:
      return solve_matrix_game(restricted_matrix(game, pop)).row_strategy;
    case MssKind::kPrd:
      return solve_prd(restricted_matrix(game, pop), spec);
    case MssKind::kAlphaRank:
      return solve_alpharank(restricted_matrix(game, pop), spec);
    case MssKind::kAnytimeExact:
      return population_exploitability(game, pop).least_exploitable;
    case MssKind::kAnytimeRmbr:
      return estimate_pe(game, pop, spec.rm_steps, spec.samples_per_step,
                         mix_seed(seed, 0x726d6272u + iteration))
          .rho;
    case MssKind::kScripted:
      return solve_scripted(spec, game, pop, iteration, seed);
  }
  throw DomainError("solve_meta: bad kind");
}

}  // namespace psrolab
