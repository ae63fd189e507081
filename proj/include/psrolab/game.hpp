// Symmetric zero-sum normal-form games, mixed strategies and populations.
#ifndef PSROLAB_GAME_HPP_
#define PSROLAB_GAME_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psrolab/common.hpp"

namespace psrolab {

// A mixture over an explicit, ordered strategy domain.  The domain is
// carried by the caller (a Population's effective list, or the full game).
struct MixedStrategy {
  Vec probs;

  int size() const { return static_cast<int>(probs.size()); }
  // True iff all coordinates are >= -kProbTol and the sum is within
  // kProbTol of 1.  Invalid mixtures are rejected, never renormalized.
  bool valid() const;
};

MixedStrategy uniform_mixture(int n);
MixedStrategy point_mass(int n, int index);

// A symmetric zero-sum game: payoff is the row player's payoff and must be
// skew-symmetric (payoff[i][j] == -payoff[j][i] within kSymTol).
struct Game {
  Mat payoff;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(payoff.size()); }

  // Validates shape, skew-symmetry and label count; throws DomainError.
  static Game from_payoff(Mat payoff, std::vector<std::string> labels = {});
};

// An ordered multiset of strategy indices.  `members` preserves insertion
// order and duplicates; `effective` lists distinct strategies in order of
// first occurrence.
struct Population {
  std::vector<int> members;
  std::vector<int> effective;

  static Population from_members(std::vector<int> members, int game_size);
  // Appends a member (duplicates allowed), updating `effective`.
  void push(int strategy);
  int effective_size() const { return static_cast<int>(effective.size()); }
};

// Expected payoff of pure strategy `row` against `sigma` played over the
// ordered strategy list `domain`.
double payoff_vs_mixture(const Game& game, int row, const MixedStrategy& sigma,
                         const std::vector<int>& domain);

struct BestResponse {
  int index = 0;        // lowest-index maximizer over the full game
  double value = 0.0;   // payoff of the best response against sigma
  std::vector<int> br_set;  // all rows within kTieTol of the max
};

// Best response over all strategies of the game to `sigma` over `domain`.
BestResponse best_response(const Game& game, const MixedStrategy& sigma,
                           const std::vector<int>& domain);

// Exploitability of a symmetric profile sigma over the full game:
// max_pi U(pi, sigma) - U(sigma, sigma); the second term is 0 by
// skew-symmetry, so this equals the best-response value.
double exploitability(const Game& game, const MixedStrategy& sigma);

enum class GameKind { kDiscEloNoise, kGaussianSkew };

// Seeded random game generation.  Matrices are antisymmetrized
// (A <- (A - A^T)/2) before being returned, so skew-symmetry is exact.
Game generate_game(GameKind kind, int n, double noise, std::uint64_t seed);

// JSON game files: {"n": int, "payoff": [[...]], "labels": [...]? }.
Game load_game(const std::string& path);
void save_game(const Game& game, const std::string& path);

}  // namespace psrolab

#endif  // PSROLAB_GAME_HPP_
