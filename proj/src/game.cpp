#include "psrolab/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "json.hpp"

namespace psrolab {

bool MixedStrategy::valid() const {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -kProbTol) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= kProbTol;
}

MixedStrategy uniform_mixture(int n) {
  if (n <= 0) throw DomainError("uniform_mixture: n must be positive");
  return MixedStrategy{Vec(n, 1.0 / n)};
}

MixedStrategy point_mass(int n, int index) {
  if (index < 0 || index >= n) throw DomainError("point_mass: index out of range");
  MixedStrategy m{Vec(n, 0.0)};
  m.probs[index] = 1.0;
  return m;
}

Game Game::from_payoff(Mat payoff, std::vector<std::string> labels) {
  const int n = static_cast<int>(payoff.size());
  if (n == 0) throw DomainError("Game: empty payoff matrix");
  for (const auto& row : payoff) {
    if (static_cast<int>(row.size()) != n)
      throw DomainError("Game: payoff matrix must be square");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(payoff[i][j]))
        throw DomainError("Game: non-finite payoff entry");
      if (std::abs(payoff[i][j] + payoff[j][i]) > kSymTol)
        throw DomainError("Game: payoff matrix is not skew-symmetric");
    }
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw DomainError("Game: label count does not match matrix size");
  if (labels.empty()) {
    labels.reserve(n);
    for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  }
  return Game{std::move(payoff), std::move(labels)};
}

Population Population::from_members(std::vector<int> members, int game_size) {
  if (members.empty()) throw DomainError("Population: must be nonempty");
  Population pop;
  for (int m : members) {
    if (m < 0 || m >= game_size)
      throw DomainError("Population: member index out of range");
    pop.push(m);
  }
  return pop;
}

void Population::push(int strategy) {
  members.push_back(strategy);
  if (std::find(effective.begin(), effective.end(), strategy) ==
      effective.end()) {
    effective.push_back(strategy);
  }
}

double payoff_vs_mixture(const Game& game, int row, const MixedStrategy& sigma,
                         const std::vector<int>& domain) {
  if (row < 0 || row >= game.size())
    throw DomainError("payoff_vs_mixture: row out of range");
  if (sigma.probs.size() != domain.size())
    throw DomainError("payoff_vs_mixture: mixture/domain size mismatch");
  if (!sigma.valid()) throw DomainError("payoff_vs_mixture: invalid mixture");
  double s = 0.0;
  for (std::size_t j = 0; j < domain.size(); ++j) {
    const int col = domain[j];
    if (col < 0 || col >= game.size())
      throw DomainError("payoff_vs_mixture: domain index out of range");
    s += sigma.probs[j] * game.payoff[row][col];
  }
  return s;
}

BestResponse best_response(const Game& game, const MixedStrategy& sigma,
                           const std::vector<int>& domain) {
  BestResponse br;
  br.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.size(); ++i) {
    const double v = payoff_vs_mixture(game, i, sigma, domain);
    if (v > br.value + kTieTol) {
      br.value = v;
      br.index = i;
      br.br_set.clear();
      br.br_set.push_back(i);
    } else if (v >= br.value - kTieTol) {
      br.br_set.push_back(i);
      if (v > br.value) br.value = v;
    }
  }
  return br;
}

double exploitability(const Game& game, const MixedStrategy& sigma) {
  std::vector<int> full(game.size());
  for (int i = 0; i < game.size(); ++i) full[i] = i;
  return best_response(game, sigma, full).value;
}

namespace {

Mat antisymmetrize(Mat a) {
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = 0.5 * (a[i][j] - a[j][i]);
      a[i][j] = v;
      a[j][i] = -v;
    }
    a[i][i] = 0.0;
  }
  return a;
}

}  // namespace

Game generate_game(GameKind kind, int n, double noise, std::uint64_t seed) {
  if (n <= 0) throw DomainError("generate_game: n must be positive");
  if (noise < 0.0) throw DomainError("generate_game: noise must be >= 0");
  std::mt19937_64 rng(seed);
  Mat a(n, Vec(n, 0.0));
  if (kind == GameKind::kGaussianSkew) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[i][j] = g(rng);
  } else {  // kDiscEloNoise: transitive (Elo) plus cyclic (disc) structure.
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec rating(n), x(n), y(n);
    for (int i = 0; i < n; ++i) rating[i] = u(rng);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    for (int i = 0; i < n; ++i) y[i] = u(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a[i][j] = 0.6 * std::tanh(rating[i] - rating[j]) +
                  0.4 * (x[i] * y[j] - x[j] * y[i]) + noise * g(rng);
      }
    }
  }
  return Game::from_payoff(antisymmetrize(std::move(a)));
}

Game load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_game: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("load_game: parse error in " + path + ": " + e.what());
  }
  if (!j.contains("n") || !j.contains("payoff"))
    throw IoError("load_game: missing required keys 'n'/'payoff' in " + path);
  const int n = j.at("n").get<int>();
  Mat payoff = j.at("payoff").get<Mat>();
  if (static_cast<int>(payoff.size()) != n)
    throw IoError("load_game: 'n' does not match payoff size in " + path);
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  try {
    return Game::from_payoff(std::move(payoff), std::move(labels));
  } catch (const DomainError& e) {
    throw IoError(std::string("load_game: invalid game: ") + e.what());
  }
}

void save_game(const Game& game, const std::string& path) {
  nlohmann::json j;
  j["n"] = game.size();
  j["payoff"] = game.payoff;
  j["labels"] = game.labels;
  std::ofstream out(path);
  if (!out) throw IoError("save_game: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace psrolab
