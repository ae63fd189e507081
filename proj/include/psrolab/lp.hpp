// Deterministic dense simplex (Bland's rule) and the solvers built on it:
// matrix-game value/strategies, population exploitability, and Farkas-style
// feasibility with an infeasibility certificate.
#ifndef PSROLAB_LP_HPP_
#define PSROLAB_LP_HPP_

#include "psrolab/common.hpp"
#include "psrolab/game.hpp"

namespace psrolab {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

// Result of: maximize c.x subject to A x <= b, x >= 0.
struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  double objective = 0.0;
  Vec x;     // primal solution (kOptimal)
  Vec dual;  // duals of the <= rows; on kInfeasible this is a Farkas
             // certificate: y >= 0, A^T y >= 0, b^T y < 0.
};

// General-purpose solver.  Handles negative RHS entries with a single
// artificial-variable phase one.  Entering/leaving choices follow Bland's
// rule (lowest eligible index), so the pivot path is deterministic.
LpResult simplex_maximize(const Mat& a, const Vec& b, const Vec& c);

struct GameSolution {
  double value = 0.0;
  MixedStrategy row_strategy;  // maximizer
  MixedStrategy col_strategy;  // minimizer
  double residual = 0.0;       // max violation of the optimality conditions
};

// Value and optimal strategies of the (possibly rectangular) zero-sum game
// with row-player payoff matrix `a` (row player maximizes).
// `objective_perturbation`, when nonempty, perturbs the internal LP
// objective; used by nondegeneracy checks to probe for alternate optima.
GameSolution solve_matrix_game(const Mat& a, const Vec& objective_perturbation = {});

struct FeasibilityResult {
  bool feasible = false;
  Vec x;            // feasible point when feasible
  Vec certificate;  // Farkas certificate otherwise
};

// Finds x >= 0 with A x <= b, or a certificate y >= 0, A^T y >= 0,
// b^T y < 0 proving none exists.  If `objective` is nonempty, among
// feasible points one maximizing objective.x is returned (the feasible
// region must be bounded in that direction).
FeasibilityResult solve_feasibility(const Mat& a, const Vec& b,
                                    const Vec& objective = {});

struct PeResult {
  double pe = 0.0;
  MixedStrategy least_exploitable;  // over pop.effective
  int full_br = 0;                  // lowest-index BR over the full game
};

// Population Exploitability: min over mixtures sigma on pop.effective of
// max over all game strategies pi of U(pi, sigma).
PeResult population_exploitability(const Game& game, const Population& pop);

}  // namespace psrolab

#endif  // PSROLAB_LP_HPP_
