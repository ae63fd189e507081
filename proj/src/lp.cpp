#include "psrolab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psrolab {
namespace {

constexpr double kPivotTol = 1e-9;   // minimum magnitude of a pivot element
constexpr double kEnterTol = 1e-9;   // reduced-cost threshold for entering
constexpr double kFeasTol = 1e-9;    // phase-one infeasibility threshold

// Dense tableau simplex.  Columns: n structural, m slacks, optionally one
// artificial; the last column is the RHS.  The objective row stores reduced
// costs for a maximization problem.
class Tableau {
 public:
  Tableau(const Mat& a, const Vec& b)
      : m_(static_cast<int>(a.size())), n_(static_cast<int>(a.empty() ? 0 : a[0].size())) {
    rows_.assign(m_, Vec(n_ + m_ + 2, 0.0));  // +1 artificial slot, +1 rhs
    basis_.resize(m_);
    dead_.assign(m_, false);
    for (int i = 0; i < m_; ++i) {
      if (static_cast<int>(a[i].size()) != n_)
        throw DomainError("simplex: ragged constraint matrix");
      for (int j = 0; j < n_; ++j) rows_[i][j] = a[i][j];
      rows_[i][n_ + i] = 1.0;
      rows_[i][rhs_col()] = b[i];
      basis_[i] = n_ + i;
    }
  }

  int art_col() const { return n_ + m_; }
  int rhs_col() const { return n_ + m_ + 1; }

  // Runs phase one if some RHS entry is negative.  Returns false when the
  // system A x <= b, x >= 0 is infeasible; `obj_` then holds the phase-one
  // reduced costs from which the Farkas certificate is read.
  bool phase_one() {
    int worst = -1;
    double worst_b = -kFeasTol;
    for (int i = 0; i < m_; ++i) {
      if (rows_[i][rhs_col()] < worst_b) {
        worst_b = rows_[i][rhs_col()];
        worst = i;
      }
    }
    if (worst < 0) return true;  // already feasible
    has_art_ = true;
    for (int i = 0; i < m_; ++i) rows_[i][art_col()] = -1.0;
    // Phase-one objective: maximize -t where t is the artificial variable.
    obj_.assign(rhs_col() + 1, 0.0);
    obj_[art_col()] = -1.0;
    pivot(worst, art_col());
    iterate(/*allow_art=*/true);
    const double t = -current_objective();
    if (t > kFeasTol) return false;
    drive_out_artificial();
    return true;
  }

  // Sets the phase-two objective (length n structural costs) and optimizes.
  LpStatus phase_two(const Vec& c) {
    obj_.assign(rhs_col() + 1, 0.0);
    for (int j = 0; j < n_ && j < static_cast<int>(c.size()); ++j) obj_[j] = c[j];
    for (int i = 0; i < m_; ++i) {
      if (dead_[i]) continue;
      const double cb = obj_[basis_[i]];
      if (cb != 0.0) {
        for (int j = 0; j <= rhs_col(); ++j) obj_[j] -= cb * rows_[i][j];
      }
    }
    return iterate(/*allow_art=*/false);
  }

  double current_objective() const { return -obj_[rhs_col()]; }

  Vec primal() const {
    Vec x(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (!dead_[i] && basis_[i] < n_) x[basis_[i]] = rows_[i][rhs_col()];
    }
    return x;
  }

  // Duals of the <= rows: negated reduced costs of the slack columns.
  Vec duals() const {
    Vec y(m_, 0.0);
    for (int i = 0; i < m_; ++i) y[i] = std::max(0.0, -obj_[n_ + i]);
    return y;
  }

 private:
  void pivot(int r, int col) {
    Vec& prow = rows_[r];
    const double inv = 1.0 / prow[col];
    for (int j = 0; j <= rhs_col(); ++j) prow[j] *= inv;
    prow[col] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r || dead_[i]) continue;
      const double f = rows_[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j <= rhs_col(); ++j) rows_[i][j] -= f * prow[j];
      rows_[i][col] = 0.0;
    }
    const double f = obj_[col];
    if (f != 0.0) {
      for (int j = 0; j <= rhs_col(); ++j) obj_[j] -= f * prow[j];
      obj_[col] = 0.0;
    }
    basis_[r] = col;
  }

  // Bland's rule: entering column = lowest index with positive reduced
  // cost; leaving row = lowest basis index among minimum-ratio rows.
  LpStatus iterate(bool allow_art) {
    const int ncols = allow_art && has_art_ ? art_col() + 1 : art_col();
    for (;;) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        if (!allow_art && has_art_ && j == art_col()) continue;
        if (obj_[j] > kEnterTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (dead_[i]) continue;
        const double coef = rows_[i][enter];
        if (coef <= kPivotTol) continue;
        const double ratio = rows_[i][rhs_col()] / coef;
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      pivot(leave, enter);
    }
  }

  // After a successful phase one the artificial variable is at value zero;
  // remove it from the basis (degenerate pivot) or mark its row dead.
  void drive_out_artificial() {
    for (int i = 0; i < m_; ++i) {
      if (dead_[i] || basis_[i] != art_col()) continue;
      int col = -1;
      for (int j = 0; j < art_col(); ++j) {
        if (std::abs(rows_[i][j]) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        dead_[i] = true;  // vacuous row
      }
    }
    for (int i = 0; i < m_; ++i) rows_[i][art_col()] = 0.0;
    has_art_ = false;
  }

  int m_, n_;
  bool has_art_ = false;
  Mat rows_;
  Vec obj_;
  std::vector<int> basis_;
  std::vector<bool> dead_;
};

}  // namespace

LpResult simplex_maximize(const Mat& a, const Vec& b, const Vec& c) {
  if (a.size() != b.size())
    throw DomainError("simplex_maximize: A/b size mismatch");
  Tableau t(a, b);
  LpResult res;
  if (!t.phase_one()) {
    res.status = LpStatus::kInfeasible;
    res.dual = t.duals();
    return res;
  }
  const LpStatus st = t.phase_two(c);
  res.status = st;
  if (st == LpStatus::kUnbounded) return res;
  res.x = t.primal();
  res.dual = t.duals();
  res.objective = t.current_objective();
  return res;
}

GameSolution solve_matrix_game(const Mat& a, const Vec& objective_perturbation) {
  const int m = static_cast<int>(a.size());
  if (m == 0) throw DomainError("solve_matrix_game: empty matrix");
  const int n = static_cast<int>(a[0].size());
  if (n == 0) throw DomainError("solve_matrix_game: empty matrix");
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n)
      throw DomainError("solve_matrix_game: ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw DomainError("solve_matrix_game: non-finite entry");
      lo = std::min(lo, v);
    }
  }
  // Shift so all entries are >= 1; the shifted game has positive value v'
  // and is solved via: maximize sum q s.t. A' q <= 1, q >= 0, with
  // v' = 1/sum(q), column strategy q/sum(q), row strategy from the duals.
  const double shift = 1.0 - lo;
  Mat ap(m, Vec(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ap[i][j] = a[i][j] + shift;
  Vec c(n, 1.0);
  for (int j = 0; j < n && j < static_cast<int>(objective_perturbation.size()); ++j)
    c[j] += objective_perturbation[j];
  const LpResult lp = simplex_maximize(ap, Vec(m, 1.0), c);
  if (lp.status != LpStatus::kOptimal)
    throw SolverError("solve_matrix_game: LP did not reach an optimum");
  double qsum = 0.0;
  for (double v : lp.x) qsum += v;
  double psum = 0.0;
  for (double v : lp.dual) psum += v;
  if (qsum <= 0.0 || psum <= 0.0)
    throw SolverError("solve_matrix_game: degenerate LP solution");
  GameSolution gs;
  gs.col_strategy.probs.resize(n);
  for (int j = 0; j < n; ++j) gs.col_strategy.probs[j] = std::max(0.0, lp.x[j] / qsum);
  gs.row_strategy.probs.resize(m);
  for (int i = 0; i < m; ++i) gs.row_strategy.probs[i] = std::max(0.0, lp.dual[i] / psum);
  gs.value = 1.0 / qsum - shift;

  // Residual: duality gap plus simplex-constraint violations on the
  // original matrix.
  double row_security = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += gs.row_strategy.probs[i] * a[i][j];
    row_security = std::min(row_security, v);
  }
  double col_security = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += a[i][j] * gs.col_strategy.probs[j];
    col_security = std::max(col_security, v);
  }
  double sum_err = 0.0;
  double acc = 0.0;
  for (double v : gs.row_strategy.probs) acc += v;
  sum_err = std::max(sum_err, std::abs(acc - 1.0));
  acc = 0.0;
  for (double v : gs.col_strategy.probs) acc += v;
  sum_err = std::max(sum_err, std::abs(acc - 1.0));
  gs.residual = std::max({col_security - row_security, sum_err,
                          std::abs(gs.value - col_security),
                          std::abs(gs.value - row_security)});
  if (objective_perturbation.empty() && gs.residual > 1e-6)
    throw SolverError("solve_matrix_game: residual too large");
  return gs;
}

FeasibilityResult solve_feasibility(const Mat& a, const Vec& b,
                                    const Vec& objective) {
  const int n = a.empty() ? 0 : static_cast<int>(a[0].size());
  Vec c = objective.empty() ? Vec(n, 0.0) : objective;
  const LpResult lp = simplex_maximize(a, b, c);
  FeasibilityResult fr;
  if (lp.status == LpStatus::kInfeasible) {
    fr.feasible = false;
    fr.certificate = lp.dual;
    return fr;
  }
  if (lp.status == LpStatus::kUnbounded)
    throw SolverError("solve_feasibility: objective unbounded over feasible set");
  fr.feasible = true;
  fr.x = lp.x;
  return fr;
}

PeResult population_exploitability(const Game& game, const Population& pop) {
  if (pop.effective.empty())
    throw DomainError("population_exploitability: empty population");
  const int n = game.size();
  const int m = pop.effective_size();
  Mat cross(n, Vec(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cross[i][j] = game.payoff[i][pop.effective[j]];
  const GameSolution gs = solve_matrix_game(cross);
  PeResult pr;
  pr.pe = gs.value;
  pr.least_exploitable = gs.col_strategy;
  pr.full_br = best_response(game, pr.least_exploitable, pop.effective).index;
  return pr;
}

}  // namespace psrolab
