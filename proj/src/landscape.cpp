#include "psrolab/landscape.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "psrolab/lp.hpp"

namespace psrolab {

std::vector<LandscapePoint> pe_landscape(const Game& game,
                                         const Population& pop,
                                         int resolution) {
  if (pop.effective_size() != 3)
    throw DomainError("pe_landscape: population must have 3 effective members");
  if (resolution < 2) throw DomainError("pe_landscape: resolution must be >= 2");
  std::vector<LandscapePoint> grid;
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j + i <= resolution; ++j) {
      const int k = resolution - i - j;
      LandscapePoint pt;
      pt.p0 = double(i) / resolution;
      pt.p1 = double(j) / resolution;
      pt.p2 = double(k) / resolution;
      MixedStrategy sigma{{pt.p0, pt.p1, pt.p2}};
      const BestResponse br = best_response(game, sigma, pop.effective);
      pt.br_index = br.index;
      Population plus = pop;
      plus.push(br.index);
      pt.post_expansion_pe = population_exploitability(game, plus).pe;
      grid.push_back(pt);
    }
  }
  return grid;
}

std::string landscape_csv(const std::vector<LandscapePoint>& grid) {
  std::string out = "p0,p1,p2,pe,br\n";
  char buf[128];
  for (const auto& pt : grid) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n", pt.p0,
                  pt.p1, pt.p2, pt.post_expansion_pe, pt.br_index);
    out += buf;
  }
  return out;
}

BrRadiusResult unique_br_radius(const Game& game, const Population& pop,
                                const MixedStrategy& sigma) {
  const BestResponse br = best_response(game, sigma, pop.effective);
  BrRadiusResult res;
  res.br = br.index;
  if (br.br_set.size() > 1) return res;  // tied BR
  if (game.size() == 1) {
    res.radius = std::numeric_limits<double>::infinity();
    return res;
  }
  // u(pi) is pi's payoff vector against the population coordinates.
  const int d = pop.effective_size();
  double gamma = std::numeric_limits<double>::infinity();
  double lmax = 0.0;
  for (int pi = 0; pi < game.size(); ++pi) {
    if (pi == br.index) continue;
    double gap = 0.0, norm2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = game.payoff[br.index][pop.effective[j]] -
                          game.payoff[pi][pop.effective[j]];
      gap += diff * sigma.probs[j];
      norm2 += diff * diff;
    }
    gamma = std::min(gamma, gap);
    lmax = std::max(lmax, std::sqrt(norm2));
  }
  if (gamma <= kTieTol || lmax <= kTieTol) return res;
  res.radius = gamma / (2.0 * lmax);
  return res;
}

}  // namespace psrolab
