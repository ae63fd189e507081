#include "psrolab/forge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "psrolab/common.hpp"
#include "psrolab/lp.hpp"
#include "psrolab/psro.hpp"

namespace psrolab {
namespace {

constexpr double kMarginFloor = 1e-7;   // smallest acceptable strict slack
constexpr double kGapFloor = 1e-4;      // eps-v gap below which we bail out
constexpr double kPinC = 0.95;          // pinned second-strategy payoff
constexpr double kCapAfterPin = 0.9;    // entry cap after the pinned step

// One linear constraint a.u <= b_lp. b_check is the relaxed bound used to
// re-verify after random perturbation of the solution.
struct LinRow {
  Vec a;
  double b_lp;
  double b_check;
};

struct ExtPlan {
  std::vector<LinRow> rows;
  Vec shift;      // empty => no substitution (plain x >= 0)
  Vec objective;  // maximized over u
  double pert = 0.0;
};

Vec pad_to(const Vec& p, std::size_t m) {
  Vec out(m, 0.0);
  for (std::size_t i = 0; i < p.size() && i < m; ++i) out[i] = p[i];
  return out;
}

class Builder {
 public:
  Builder(MssSpec target, int n, std::uint64_t seed, bool shortcut_mode,
          bool theorem4, bool force_surrogate = false)
      : target_(std::move(target)),
        n_(n),
        seed_(seed),
        shortcut_mode_(shortcut_mode),
        theorem4_(theorem4),
        surrogate_(force_surrogate),
        non_conv_(force_surrogate),
        rng_(mix_seed(seed, 0x666f726765ULL)) {
    if (n_ < 2) throw DomainError("forge: n must be >= 2");
    if (!is_rgb_kind(target_.kind))
      throw DomainError("forge: target must be a restricted-game solver");
    payoff_ = {{0.0}};
    pop_ = Population::from_members({0}, n_);
  }

  void run() {
    while (size() < n_) {
      ++iter_;
      if (iter_ > 6 * n_ && !surrogate_) enter_surrogate();
      if (iter_ > 12 * n_)
        throw ForgeError("forge: construction failed to terminate");
      step();
    }
  }

  const Mat& payoff() const { return payoff_; }
  const Vec& q() const { return q_; }
  double v() const { return v_; }
  const Vec& p2_script() const { return p2_script_; }
  const std::vector<Vec>& placements() const { return placements_; }
  const std::vector<Vec>& history() const { return history_; }
  const std::vector<double>& history_r() const { return history_r_; }
  bool non_convergent() const { return non_conv_; }
  std::vector<ForgeLogEntry> take_log() { return std::move(log_); }

 private:
  int size() const { return static_cast<int>(payoff_.size()); }
  double entry_cap() const {
    return (theorem4_ && size() > 2) ? kCapAfterPin : 2.0;
  }

  Vec payoffs_vs(const Vec& mix) const {
    const std::size_t m = payoff_.size();
    Vec full = pad_to(mix, m);
    Vec out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) out[i] = dot(payoff_[i], full);
    return out;
  }

  double max_payoff_vs(const Vec& mix) const {
    const Vec vals = payoffs_vs(mix);
    return *std::max_element(vals.begin(), vals.end());
  }

  Vec restricted_ne() const {
    return solve_matrix_game(payoff_).row_strategy.probs;
  }

  void enter_surrogate() {
    surrogate_ = true;
    non_conv_ = true;
  }

  Vec meta_mixture() {
    if (surrogate_) return restricted_ne();
    const Game partial = Game::from_payoff(payoff_);
    MixedStrategy sigma =
        solve_meta(target_, partial, pop_, iter_, seed_);
    return sigma.probs;
  }

  void record(ForgeLogEntry entry) {
    entry.step = iter_;
    entry.surrogate = surrogate_;
    log_.push_back(std::move(entry));
  }

  void do_reuse(const Vec& p, int br, double e, double eps) {
    pop_.push(br);
    history_.push_back(p);
    history_r_.push_back(e);
    ++stall_;
    ForgeLogEntry entry;
    entry.case_taken = "reuse";
    entry.e = e;
    entry.eps = eps;
    entry.v = v_;
    entry.added = br;
    record(std::move(entry));
    // Restricted-game solvers are deterministic in the effective game, so a
    // reuse repeats forever; hand the remainder to the surrogate quickly.
    if (stall_ >= 5 && !surrogate_) enter_surrogate();
    if (stall_ >= 5 + 2 * n_)
      throw ForgeError("forge: stalled even under surrogate mixtures");
  }

  void place(const Vec& u, const Vec& p, ForgeLogEntry entry) {
    const std::size_t m = payoff_.size();
    for (std::size_t i = 0; i < m; ++i) {
      payoff_[i].push_back(-u[i]);
    }
    Vec row = u;
    row.push_back(0.0);
    payoff_.push_back(std::move(row));
    pop_.push(static_cast<int>(m));
    history_.push_back(p);
    history_r_.push_back(dot(u, pad_to(p, m)));
    placements_.push_back(p);
    stall_ = 0;
    entry.added = static_cast<int>(m);
    record(std::move(entry));
  }

  // Solves the extension system, applies a nonnegative random perturbation,
  // and re-verifies every constraint against its relaxed bound.
  Vec solve_extension(const ExtPlan& plan, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();
    Mat a;
    Vec b;
    a.reserve(plan.rows.size());
    for (const LinRow& row : plan.rows) {
      a.push_back(row.a);
      double rhs = row.b_lp;
      if (!plan.shift.empty()) rhs -= dot(row.a, plan.shift);
      b.push_back(rhs);
    }
    FeasibilityResult fr = solve_feasibility(a, b, plan.objective);
    if (!fr.feasible) {
      entry->lp_status = "infeasible";
      throw ForgeError("forge: extension system infeasible (step " +
                       std::to_string(iter_) + ", case " + entry->case_taken +
                       ")");
    }
    entry->lp_status = "optimal";
    Vec u = fr.x;
    u.resize(m, 0.0);
    if (!plan.shift.empty())
      for (std::size_t i = 0; i < m; ++i) u[i] += plan.shift[i];

    double pert = plan.pert;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 20; ++attempt) {
      Vec cand = u;
      if (pert > 0.0)
        for (double& x : cand) x += pert * unif(rng_);
      double slack = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (const LinRow& row : plan.rows) {
        const double s = row.b_check - dot(row.a, cand);
        slack = std::min(slack, s);
        if (s < 0.0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        entry->min_margin = slack;
        return cand;
      }
      pert *= 0.5;
    }
    // Perturbation kept violating the relaxed bounds; fall back to the
    // unperturbed LP point, which satisfies the strict bounds by
    // construction.
    double slack = std::numeric_limits<double>::infinity();
    for (const LinRow& row : plan.rows)
      slack = std::min(slack, row.b_check - dot(row.a, u));
    entry->min_margin = slack;
    if (slack < 0.0)
      throw ForgeError("forge: extension verification failed at step " +
                       std::to_string(iter_));
    return u;
  }

  void add_history_rows(ExtPlan* plan, double margin) const {
    const std::size_t m = payoff_.size();
    for (std::size_t t = 0; t < history_.size(); ++t) {
      plan->rows.push_back(
          {pad_to(history_[t], m), history_r_[t] - margin,
           history_r_[t] - 0.5 * margin});
    }
  }

  void add_entry_caps(ExtPlan* plan) const {
    const std::size_t m = payoff_.size();
    const double cap = entry_cap();
    for (std::size_t i = 0; i < m; ++i) {
      Vec row(m, 0.0);
      row[i] = 1.0;
      plan->rows.push_back({std::move(row), cap, cap + 1e-9});
    }
  }

  void add_ne_row(ExtPlan* plan, double margin) const {
    const std::size_t m = payoff_.size();
    Vec ne = restricted_ne();
    Vec row(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) row[i] = -ne[i];
    plan->rows.push_back({std::move(row), -margin, -0.5 * margin});
  }

  static Vec negate(const Vec& p) {
    Vec out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = -p[i];
    return out;
  }

  Vec objective_towards(const Vec& p) const {
    const std::size_t m = payoff_.size();
    Vec c = pad_to(p, m);
    for (double& x : c) x -= 0.01;  // bias unused entries down
    return c;
  }

  // Plain protective extension: the new strategy is the unique best response
  // to p, every prior mixture keeps its old best response, and the
  // restricted-game NE stays beaten.
  Vec extend_plain(const Vec& p, double e, double eps, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();
    const double dp = 0.25 * (eps - e);
    const double d = 0.5 * (eps + e);
    ExtPlan plan;
    plan.shift = Vec(m, d);
    plan.objective = objective_towards(p);
    plan.pert = dp / 8.0;
    add_history_rows(&plan, dp);
    plan.rows.push_back({negate(pad_to(p, m)), -(e + dp), -(e + 0.5 * dp)});
    add_ne_row(&plan, dp);
    // Keep eps decaying slowly: cap the new mixture payoff just below eps.
    const double cap = eps - (eps - e) / 64.0;
    plan.rows.push_back({pad_to(p, m), cap, cap + 0.25 * dp});
    add_entry_caps(&plan);
    entry->delta = d;
    entry->delta_prime = dp;
    return solve_extension(plan, entry);
  }

  // First extension past the 3-strategy core: adds the coordinate-ordering
  // block that makes the core minimax point nondegenerate.
  Vec extend_b_step(const Vec& p, double e, double eps, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();  // == 3
    const double dp = 0.25 * (eps - e);
    const double d = 0.5 * (eps + e);
    const double alpha = 1.0 - (eps - e) / (4.0 * (eps + e));
    const double ep = (eps - e) / 16.0;
    const Vec pf = pad_to(p, m);
    const int istar = (pf[1] <= pf[2]) ? 1 : 2;
    ExtPlan plan;
    plan.shift = Vec(m, d);
    plan.shift[istar] = d * alpha;
    plan.objective = objective_towards(p);
    plan.pert = std::min(dp, ep) / 8.0;
    add_history_rows(&plan, dp);
    plan.rows.push_back({negate(pf), -(e + dp), -(e + 0.5 * dp)});
    add_ne_row(&plan, dp);
    for (std::size_t i = 0; i < m; ++i) {
      if (static_cast<int>(i) == istar) continue;
      Vec row(m, 0.0);
      row[istar] = 1.0;
      row[i] = -1.0;
      plan.rows.push_back({std::move(row), -ep, -0.5 * ep});
    }
    const double cap = eps - (eps - e) / 64.0;
    plan.rows.push_back({pf, cap, cap + 0.25 * dp});
    add_entry_caps(&plan);
    entry->delta = d;
    entry->delta_prime = dp;
    entry->alpha = alpha;
    entry->eps_prime = ep;
    return solve_extension(plan, entry);
  }

  // Outside extension: the meta-mixture has mass outside the core; the new
  // strategy beats it while staying at or below v against the shortcut
  // point, so the shortcut's value is preserved.
  Vec extend_case2(const Vec& p, double e, double eps, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();
    const double gap = eps - v_;
    const Vec pf = pad_to(p, m);
    const Vec qf = pad_to(q_, m);
    const double floor_val = std::max(e, v_) + gap / 8.0;
    entry->delta_prime = gap / 32.0;

    // Attempt 1: direct system keeping u.q below v (no substitution).
    {
      ExtPlan plan;
      plan.objective = objective_towards(p);
      plan.pert = gap / 256.0;
      add_history_rows(&plan, gap / 32.0);
      plan.rows.push_back(
          {negate(pf), -floor_val, -(floor_val - gap / 64.0)});
      add_ne_row(&plan, gap / 32.0);
      plan.rows.push_back({qf, v_ - gap / 32.0, v_ - gap / 64.0});
      const double cap = eps - gap / 64.0;
      plan.rows.push_back({pf, cap, cap + gap / 128.0});
      const double posf = std::min(0.01, gap / 32.0);
      for (std::size_t i = 0; i < m; ++i) {
        Vec row(m, 0.0);
        row[i] = -1.0;
        plan.rows.push_back({std::move(row), -posf, -0.5 * posf});
      }
      add_entry_caps(&plan);
      Mat a;
      Vec b;
      for (const LinRow& row : plan.rows) {
        a.push_back(row.a);
        b.push_back(row.b_lp);
      }
      if (solve_feasibility(a, b, plan.objective).feasible) {
        entry->delta = floor_val;
        return solve_extension(plan, entry);
      }
    }

    // Attempt 2: midpoint scheme, always feasible; u.q may rise to the
    // midpoint between v and eps.
    double cmass = 0.0;
    for (std::size_t i = 3; i < pf.size(); ++i) cmass += pf[i];
    const double mid = 0.5 * (v_ + eps);
    const double dbar = gap * std::max(cmass, 1e-9) / 16.0;
    const double d2 = gap / 4.0;
    const double d1 = mid - dbar;
    ExtPlan plan;
    plan.shift = Vec(m, d1);
    for (std::size_t i = 3; i < m; ++i) plan.shift[i] += d2;
    plan.objective = objective_towards(p);
    plan.pert = dbar / 8.0;
    add_history_rows(&plan, dbar);
    plan.rows.push_back({negate(pf), -(mid + dbar), -(mid + 0.5 * dbar)});
    add_ne_row(&plan, dbar);
    plan.rows.push_back({qf, mid - dbar, mid - 0.5 * dbar});
    const double cap = eps - gap / 64.0;
    plan.rows.push_back({pf, cap, cap + 0.25 * dbar});
    add_entry_caps(&plan);
    entry->delta = mid;
    entry->delta_prime = dbar;
    return solve_extension(plan, entry);
  }

  // Core-supported refresh: pin the new mixture payoff into a window below
  // eps, reimpose the ordering block, and recompute the shortcut point from
  // the refreshed subgame afterwards.
  Vec extend_case3(const Vec& p, double e, double eps, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();
    const double dp = 0.25 * (eps - e);
    const double d = 0.5 * (eps + e);
    const double alpha = 1.0 - (eps - e) / (4.0 * (eps + e));
    const double ep = (eps - e) / 16.0;
    const double mid = 0.5 * (e + eps);
    const Vec pf = pad_to(p, m);
    const int istar = (pf[1] <= pf[2]) ? 1 : 2;
    ExtPlan plan;
    plan.shift = Vec(m, d);
    plan.shift[istar] = d * alpha;
    plan.objective = objective_towards(p);
    plan.pert = std::min(dp, ep) / 16.0;
    add_history_rows(&plan, dp);
    plan.rows.push_back({pf, mid + 0.5 * dp, mid + 0.75 * dp});
    plan.rows.push_back(
        {negate(pf), -(mid - 0.5 * dp), -(mid - 0.75 * dp)});
    add_ne_row(&plan, dp);
    for (std::size_t i = 0; i < m; ++i) {
      if (static_cast<int>(i) == istar) continue;
      Vec row(m, 0.0);
      row[istar] = 1.0;
      row[i] = -1.0;
      plan.rows.push_back({std::move(row), -ep, -0.5 * ep});
    }
    add_entry_caps(&plan);
    entry->delta = d;
    entry->delta_prime = dp;
    entry->alpha = alpha;
    entry->eps_prime = ep;
    return solve_extension(plan, entry);
  }

  // Last extension in shortcut mode: the new strategy additionally beats the
  // shortcut point by a margin, making it the unique best response there.
  Vec extend_final(const Vec& p, double e, double eps, ForgeLogEntry* entry) {
    const std::size_t m = payoff_.size();
    const double big = std::max(v_, e);
    const double dp = 0.25 * (eps - big);
    const double d = 0.5 * (big + eps);
    const Vec pf = pad_to(p, m);
    ExtPlan plan;
    plan.shift = Vec(m, d);
    plan.objective = objective_towards(p);
    plan.pert = dp / 8.0;
    add_history_rows(&plan, dp);
    plan.rows.push_back({negate(pf), -(e + dp), -(e + 0.5 * dp)});
    add_ne_row(&plan, dp);
    plan.rows.push_back(
        {negate(pad_to(q_, m)), -(v_ + dp), -(v_ + 0.5 * dp)});
    add_entry_caps(&plan);
    entry->delta = d;
    entry->delta_prime = dp;
    return solve_extension(plan, entry);
  }

  // Recomputes the shortcut point after a core step: minimax column mixture
  // of the (all strategies) x (core) cross game.
  void refresh_shortcut(double eps_next) {
    const std::size_t m = payoff_.size();
    Mat cross(m, Vec(3, 0.0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < 3; ++j) cross[i][j] = payoff_[i][j];
    GameSolution gs = solve_matrix_game(cross);
    q_ = gs.col_strategy.probs;
    v_ = gs.value;
    if (!(v_ < eps_next - 1e-12))
      throw ForgeError("forge: shortcut value reached the threshold");
  }

  void step() {
    const std::size_t m = payoff_.size();
    Vec p = meta_mixture();
    if (m == 1) {
      // Seed step: the second strategy beats the first by exactly 1.
      ForgeLogEntry entry;
      entry.case_taken = "first";
      entry.e = 0.0;
      entry.eps = 1.0;
      place({1.0}, p, std::move(entry));
      return;
    }

    const Vec vals = payoffs_vs(p);
    int br = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i] > vals[br]) br = static_cast<int>(i);
    const double e = vals[br];
    double eps = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < history_.size(); ++t) {
      const double r = max_payoff_vs(history_[t]);
      history_r_[t] = r;
      eps = std::min(eps, r);
    }

    if (m == 2 && theorem4_) {
      // Pinned third strategy (c, c); verify it fits the current mixtures.
      const Vec u = {kPinC, kPinC};
      double slack = dot(u, pad_to(p, 2)) - e;
      for (std::size_t t = 0; t < history_.size(); ++t)
        slack = std::min(
            slack, history_r_[t] - dot(u, pad_to(history_[t], 2)));
      if (slack < 0.005)
        throw ForgeError("forge: pinned strategy violates protection");
      if (p2_script_.empty()) p2_script_ = p;
      ForgeLogEntry entry;
      entry.case_taken = "pinned-c";
      entry.e = e;
      entry.eps = eps;
      entry.min_margin = slack;
      entry.lp_status = "pinned";
      place(u, p, std::move(entry));
      return;
    }

    if (!in_a2_) {
      if (eps - e <= 1e-6) {
        do_reuse(p, br, e, eps);
        return;
      }
      ForgeLogEntry entry;
      entry.e = e;
      entry.eps = eps;
      if (m == 2 && p2_script_.empty()) p2_script_ = p;
      const bool b_step = shortcut_mode_ && n_ >= 5 && m == 3;
      Vec u;
      if (b_step) {
        entry.case_taken = "b-step";
        u = extend_b_step(p, e, eps, &entry);
      } else {
        entry.case_taken = "extend";
        u = extend_plain(p, e, eps, &entry);
      }
      const double eps_next = std::min(eps, dot(u, pad_to(p, m)));
      place(u, p, std::move(entry));
      if (b_step) {
        refresh_shortcut(eps_next);
        in_a2_ = true;
      }
      return;
    }

    // Inside the shortcut regime.
    const double gap = eps - v_;
    if (gap < kGapFloor && !surrogate_) {
      enter_surrogate();
      p = meta_mixture();
      step_a2(p);
      return;
    }
    if (gap < 16.0 * kMarginFloor)
      throw ForgeError("forge: protection gap collapsed");
    step_a2(p);
  }

  void step_a2(const Vec& p) {
    const std::size_t m = payoff_.size();
    const Vec vals = payoffs_vs(p);
    int br = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i] > vals[br]) br = static_cast<int>(i);
    const double e = vals[br];
    double eps = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < history_.size(); ++t)
      eps = std::min(eps, history_r_[t]);
    const double gap = eps - v_;

    if (e > v_ + gap / 16.0) {
      do_reuse(p, br, e, eps);
      return;
    }
    ForgeLogEntry entry;
    entry.e = e;
    entry.eps = eps;
    entry.v = v_;
    Vec u;
    bool refreshed = false;
    const Vec pf = pad_to(p, m);
    double cmass = 0.0;
    for (std::size_t i = 3; i < pf.size(); ++i) cmass += pf[i];
    if (static_cast<int>(m) == n_ - 1) {
      entry.case_taken = "final";
      u = extend_final(p, e, eps, &entry);
    } else if (cmass > 1e-9) {
      entry.case_taken = "case2";
      u = extend_case2(p, e, eps, &entry);
    } else {
      if (eps - e <= 1e-6) {
        do_reuse(p, br, e, eps);
        return;
      }
      entry.case_taken = "case3";
      u = extend_case3(p, e, eps, &entry);
      refreshed = true;
    }
    const double eps_next = std::min(eps, dot(u, pf));
    if (!refreshed) v_ = std::max(v_, dot(u, pad_to(q_, m)));
    place(u, p, std::move(entry));
    if (refreshed) refresh_shortcut(eps_next);
    if (!(v_ < eps_next - 1e-12))
      throw ForgeError("forge: shortcut value invariant violated");
  }

  MssSpec target_;
  int n_;
  std::uint64_t seed_;
  bool shortcut_mode_;
  bool theorem4_;
  Mat payoff_;
  Population pop_;
  std::vector<Vec> history_;
  std::vector<double> history_r_;
  std::vector<Vec> placements_;
  Vec q_;
  double v_ = 0.0;
  bool in_a2_ = false;
  Vec p2_script_;
  bool surrogate_ = false;
  bool non_conv_ = false;
  int iter_ = 0;
  int stall_ = 0;
  std::vector<ForgeLogEntry> log_;
  std::mt19937_64 rng_;
};

void swap_strategy(Mat* payoff, std::vector<int>* support, int a, int b) {
  if (a == b) return;
  for (Vec& row : *payoff) std::swap(row[a], row[b]);
  std::swap((*payoff)[a], (*payoff)[b]);
  for (int& s : *support) {
    if (s == a)
      s = b;
    else if (s == b)
      s = a;
  }
}

ForgeResult finish(Builder* builder, const MssSpec& target, int init,
                   std::vector<Vec> script, std::vector<int> support,
                   Mat payoff) {
  const int n = static_cast<int>(payoff.size());
  if (init < 0 || init >= n)
    throw DomainError("forge: init strategy index out of range");
  swap_strategy(&payoff, &support, 0, init);
  std::sort(support.begin(), support.end());
  ForgeResult result{Game::from_payoff(payoff), MssSpec::of(MssKind::kNash),
                     std::move(support), builder->take_log(), target,
                     builder->non_convergent(), init};
  MssSpec shortcut = MssSpec::of(MssKind::kScripted);
  shortcut.scripted_mixtures = std::move(script);
  shortcut.scripted_fallback = "nash";
  result.shortcut = std::move(shortcut);
  return result;
}

std::vector<Vec> full_path_script(const Builder& builder) {
  return builder.placements();
}

// --- Multi-strategy support assembly ------------------------------------


Mat cyclic_block(int s, double w, double jitter, std::mt19937_64* rng) {
  Mat block(s, Vec(s, 0.0));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < s; ++i) {
    for (int j = i + 1; j < s; ++j) {
      const int diff = (j - i) % s;
      double val = (diff <= (s - 1) / 2) ? w : -w;
      val += jitter * unif(*rng);
      block[i][j] = val;
      block[j][i] = -val;
    }
  }
  return block;
}

bool block_has_unique_full_support_ne(const Mat& block) {
  Game g = Game::from_payoff(block);
  GameSolution gs = solve_matrix_game(block);
  for (double x : gs.row_strategy.probs)
    if (x < 1e-6) return false;
  std::vector<int> all(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) all[i] = static_cast<int>(i);
  return nondegeneracy_check(g, all);
}

ForgeResult forge_multi_support_once(const MssSpec& target, int n, int s,
                                     int init, std::uint64_t seed,
                                     bool theorem4, bool force_surrogate) {
  const int n_pure = n - s + 1;
  if (n_pure < 5)
    throw SpecError("forge: s-strategy support requires n >= s + 4");
  Builder builder(target, n_pure, seed, /*shortcut_mode=*/true, theorem4,
                  force_surrogate);
  builder.run();
  const Mat& base = builder.payoff();
  const int star = n_pure - 1;
  const int n_out = n_pure - 1;  // strategies kept outside the support
  const Vec& qstar = builder.q();

  // Margin bookkeeping on the pure-support instance.
  double range = 0.0;
  for (const Vec& row : base)
    for (double x : row) range = std::max(range, std::fabs(x));
  range = std::max(range, 1.0);
  Vec star_vs_q(3, 0.0);
  double gamma = std::numeric_limits<double>::infinity();
  {
    Vec vals(n_pure, 0.0);
    Vec qf = pad_to(qstar, n_pure);
    for (int i = 0; i < n_pure; ++i) vals[i] = dot(base[i], qf);
    double second = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < star; ++i) second = std::max(second, vals[i]);
    gamma = vals[star] - second;
  }
  // Only the final strategy's row is perturbed when it is replaced by the
  // support block, so the relevant slack at each recorded mixture is how
  // far that row sits below the protection threshold (or, where it is the
  // best response, its lead over the runner-up).
  double slack_min = gamma;
  for (std::size_t t = 0; t < builder.history().size(); ++t) {
    Vec vals(n_pure, 0.0);
    Vec pf = pad_to(builder.history()[t], n_pure);
    for (int i = 0; i < n_pure; ++i) vals[i] = dot(base[i], pf);
    double best_other = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < star; ++i) best_other = std::max(best_other, vals[i]);
    const double r = builder.history_r()[t];
    const double slack = (vals[star] >= best_other)
                             ? vals[star] - best_other
                             : r - vals[star];
    slack_min = std::min(slack_min, slack);
  }
  if (slack_min <= 1e-3 || gamma <= 1e-3)
    throw ForgeError("forge: pure-support instance margins too thin");

  // Interior exposure base near the shortcut point.
  const double lambda = std::min(0.01, gamma / (16.0 * range));
  Vec pbase(3, 0.0);
  for (int c = 0; c < 3; ++c)
    pbase[c] = (1.0 - lambda) * qstar[c] + lambda / 3.0;

  // Distinct tangent directions in a 120-degree arc toward the barycenter.
  const Vec ta = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
  const Vec tb = {1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0),
                  -2.0 / std::sqrt(6.0)};
  Vec g(3, 0.0);
  for (int c = 0; c < 3; ++c) g[c] = 1.0 / 3.0 - pbase[c];
  double theta0 = 0.0;
  const double ga = dot(g, ta), gb = dot(g, tb);
  if (ga * ga + gb * gb > 1e-18) theta0 = std::atan2(gb, ga);
  std::vector<Vec> dirs(s, Vec(3, 0.0));
  for (int i = 0; i < s; ++i) {
    const double frac = (s == 1) ? 0.0
                                 : (static_cast<double>(i) / (s - 1) - 0.5);
    const double theta = theta0 + frac * (2.0 * M_PI / 3.0);
    for (int c = 0; c < 3; ++c)
      dirs[i][c] = std::cos(theta) * ta[c] + std::sin(theta) * tb[c];
  }

  double eta = std::min(slack_min, 0.5 * gamma) / 8.0;
  double dq = std::min(eta, lambda / 6.0);

  for (int attempt = 0; attempt < 20; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, 0xa55e6b1eULL + attempt));
    std::uniform_real_distribution<double> unif01(0.0, 1.0);

    Mat payoff(n, Vec(n, 0.0));
    for (int i = 0; i < n_out; ++i)
      for (int j = 0; j < n_out; ++j) payoff[i][j] = base[i][j];

    // Cross payoffs of the support copies.
    double rmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s; ++i) {
      const int ei = n_out + i;
      const double proj = dot(pbase, dirs[i]);
      for (int c = 0; c < n_out; ++c) {
        double val;
        if (c < 3) {
          val = base[star][c] + eta * (dirs[i][c] - proj);
        } else {
          val = base[star][c] - 0.5 * eta * unif01(rng);
        }
        payoff[ei][c] = val;
        payoff[c][ei] = -val;
        rmin = std::min(rmin, val);
      }
    }
    if (rmin <= 0.0) {
      eta *= 0.5;
      dq *= 0.5;
      continue;
    }

    // Internal support block, strictly smaller than the cross payoffs.
    const double w = (s > 1) ? 0.4 * rmin : 0.0;
    Mat block = cyclic_block(s, w, w * 1e-2, &rng);
    if (s > 1 && !block_has_unique_full_support_ne(block)) continue;
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) payoff[n_out + i][n_out + j] = block[i][j];

    // Exposure mixtures and verification.
    std::vector<Vec> exposures(s, Vec(3, 0.0));
    bool ok = true;
    for (int i = 0; i < s && ok; ++i) {
      for (int c = 0; c < 3; ++c) {
        exposures[i][c] = pbase[c] + dq * dirs[i][c];
        if (exposures[i][c] < 0.0) ok = false;
      }
    }
    if (ok) {
      Game ext = Game::from_payoff(payoff);
      for (int i = 0; i < s && ok; ++i) {
        MixedStrategy mix{pad_to(exposures[i], 3)};
        BestResponse br = best_response(ext, mix, {0, 1, 2});
        if (br.index != n_out + i || br.br_set.size() != 1) ok = false;
      }
    }
    std::vector<Vec> script;
    if (ok) {
      script.push_back({1.0});
      script.push_back(builder.p2_script());
      for (int i = 0; i < s; ++i) script.push_back(exposures[i]);
      Game ext = Game::from_payoff(payoff);
      MssSpec spec = MssSpec::of(MssKind::kScripted);
      spec.scripted_mixtures = script;
      spec.scripted_fallback = "nash";
      RunRecord rec = run_psro(ext, spec, 0, s + 2, seed);
      if (!rec.converged) ok = false;
    }
    if (ok && theorem4) {
      Game ext = Game::from_payoff(payoff);
      std::vector<int> support(s);
      for (int i = 0; i < s; ++i) support[i] = n_out + i;
      if (!nondegeneracy_check(ext, support)) ok = false;
      if (ok) {
        // Prefix confinement: the least exploitable mixture of the first two
        // strategies must be best-responded from within the first three.
        Population first2 = Population::from_members({0, 1}, ext.size());
        PeResult pe = population_exploitability(ext, first2);
        if (pe.full_br > 2) ok = false;
      }
    }
    if (!ok) {
      eta *= 0.5;
      dq *= 0.5;
      continue;
    }

    std::vector<int> support(s);
    for (int i = 0; i < s; ++i) support[i] = n_out + i;
    return finish(&builder, target, init, std::move(script),
                  std::move(support), std::move(payoff));
  }
  throw ForgeError("forge: support assembly failed after 20 attempts");
}

// If the target-tracking construction ends with margins too thin to host
// the support block, rebuild the whole instance around surrogate (NE)
// mixtures; the result is flagged target-non-convergent.
ForgeResult forge_multi_support(const MssSpec& target, int n, int s, int init,
                                std::uint64_t seed, bool theorem4) {
  try {
    return forge_multi_support_once(target, n, s, init, seed, theorem4,
                                    /*force_surrogate=*/false);
  } catch (const ForgeError&) {
    return forge_multi_support_once(target, n, s, init, seed, theorem4,
                                    /*force_surrogate=*/true);
  }
}

ForgeResult forge_single_support(const MssSpec& target, int n, int init,
                                 std::uint64_t seed, bool shortcut_mode,
                                 bool theorem4) {
  Builder builder(target, n, seed, shortcut_mode, theorem4);
  builder.run();
  Mat payoff = builder.payoff();
  std::vector<Vec> script;
  if (shortcut_mode && n >= 5) {
    script.push_back({1.0});
    script.push_back(builder.p2_script());
    script.push_back(builder.q());
  } else {
    script = full_path_script(builder);
  }
  if (theorem4) {
    Game g = Game::from_payoff(payoff);
    if (!nondegeneracy_check(g, {n - 1}))
      throw ForgeError("forge: degenerate single-strategy support");
    Population first2 = Population::from_members({0, 1}, g.size());
    PeResult pe = population_exploitability(g, first2);
    if (pe.full_br > 2)
      throw ForgeError("forge: prefix confinement violated");
  }
  return finish(&builder, target, init, std::move(script), {n - 1},
                std::move(payoff));
}

}  // namespace

ForgeResult forge_worst_case(const MssSpec& target, int n, int init,
                             std::uint64_t seed) {
  return forge_single_support(target, n, init, seed, /*shortcut_mode=*/false,
                              /*theorem4=*/false);
}

ForgeResult forge_with_shortcut(const MssSpec& target, int n, int s, int init,
                                std::uint64_t seed) {
  if (s < 1 || s % 2 == 0)
    throw DomainError("forge: support size must be odd and positive");
  if (s == 1)
    return forge_single_support(target, n, init, seed, /*shortcut_mode=*/true,
                                /*theorem4=*/false);
  return forge_multi_support(target, n, s, init, seed, /*theorem4=*/false);
}

ForgeResult forge_theorem4_instance(const MssSpec& target, int n, int s,
                                    std::uint64_t seed) {
  if (s < 1 || s % 2 == 0)
    throw DomainError("forge: support size must be odd and positive");
  if (s == 1)
    return forge_single_support(target, n, /*init=*/0, seed,
                                /*shortcut_mode=*/true, /*theorem4=*/true);
  return forge_multi_support(target, n, s, /*init=*/0, seed,
                             /*theorem4=*/true);
}

namespace {

// Full-rank test of the square indifference system
// [[A_SS, -1], [1^T, 0]] via Gaussian elimination.
bool indifference_system_full_rank(const Mat& a) {
  const std::size_t k = a.size();
  const std::size_t dim = k + 1;
  Mat m(dim, Vec(dim, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] = a[i][j];
    m[i][k] = -1.0;
    m[k][i] = 1.0;
  }
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (std::fabs(m[piv][col]) < 1e-9) return false;
    std::swap(m[col], m[piv]);
    for (std::size_t r = col + 1; r < dim; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < dim; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return true;
}

bool subset_nondegenerate(const Game& game, const std::vector<int>& subset) {
  const std::size_t k = subset.size();
  Mat sub(k, Vec(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      sub[i][j] = game.payoff[subset[i]][subset[j]];
  GameSolution base = solve_matrix_game(sub);
  Vec pert(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) pert[j] = 1e-9 * (j + 1);
  GameSolution shifted = solve_matrix_game(sub, pert);
  for (std::size_t i = 0; i < k; ++i) {
    if (std::fabs(base.row_strategy.probs[i] - shifted.row_strategy.probs[i]) >
        1e-7)
      return false;
    if (std::fabs(base.col_strategy.probs[i] - shifted.col_strategy.probs[i]) >
        1e-7)
      return false;
  }
  // No mixed strategy may admit more pure best responses than its support
  // size: count rows tying the value against the column strategy and
  // columns tying it against the row strategy.
  std::size_t row_support = 0, col_support = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (base.row_strategy.probs[i] > 1e-8) ++row_support;
    if (base.col_strategy.probs[i] > 1e-8) ++col_support;
  }
  std::size_t row_br = 0, col_br = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double vs_col = 0.0, vs_row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      vs_col += sub[i][j] * base.col_strategy.probs[j];
      vs_row += base.row_strategy.probs[j] * sub[j][i];
    }
    if (vs_col >= base.value - 1e-9) ++row_br;
    if (vs_row <= base.value + 1e-9) ++col_br;
  }
  if (row_br > col_support || col_br > row_support) return false;

  std::vector<int> active;
  for (std::size_t i = 0; i < k; ++i)
    if (base.row_strategy.probs[i] > 1e-8 ||
        base.col_strategy.probs[i] > 1e-8)
      active.push_back(subset[i]);
  Mat square(active.size(), Vec(active.size(), 0.0));
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = 0; j < active.size(); ++j)
      square[i][j] = game.payoff[active[i]][active[j]];
  return indifference_system_full_rank(square);
}

}  // namespace

bool nondegeneracy_check(const Game& game, const std::vector<int>& support) {
  if (support.empty()) throw DomainError("nondegeneracy_check: empty support");
  for (int s : support)
    if (s < 0 || s >= game.size())
      throw DomainError("nondegeneracy_check: support index out of range");
  std::vector<std::vector<int>> subsets;
  const std::size_t k = support.size();
  if (k <= 6) {
    for (std::size_t mask = 1; mask < (1ULL << k); ++mask) {
      std::vector<int> sub;
      for (std::size_t i = 0; i < k; ++i)
        if (mask & (1ULL << i)) sub.push_back(support[i]);
      subsets.push_back(std::move(sub));
    }
  } else {
    subsets.push_back(support);
    for (int s : support) subsets.push_back({s});
    std::mt19937_64 rng(0x6e646567ULL);
    for (int t = 0; t < 50; ++t) {
      std::vector<int> sub;
      while (sub.empty()) {
        sub.clear();
        for (int s : support)
          if (rng() & 1) sub.push_back(s);
      }
      subsets.push_back(std::move(sub));
    }
  }
  for (const std::vector<int>& sub : subsets)
    if (!subset_nondegenerate(game, sub)) return false;
  return true;
}

}  // namespace psrolab
