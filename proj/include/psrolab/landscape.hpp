// Simplex analyses: post-expansion PE landscapes over 3-strategy
// populations and the unique-best-response stability radius.
#ifndef PSROLAB_LANDSCAPE_HPP_
#define PSROLAB_LANDSCAPE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "psrolab/game.hpp"

namespace psrolab {

struct LandscapePoint {
  double p0 = 0, p1 = 0, p2 = 0;  // barycentric coordinates
  double post_expansion_pe = 0;
  int br_index = 0;
};

// Scans the barycentric lattice {(i,j,k)/resolution : i+j+k = resolution}
// over a 3-member effective population; at each point records the full-game
// best response and the PE of the population expanded by it.
std::vector<LandscapePoint> pe_landscape(const Game& game,
                                         const Population& pop,
                                         int resolution);

// CSV: header "p0,p1,p2,pe,br", %.17g doubles, LF endings.
std::string landscape_csv(const std::vector<LandscapePoint>& grid);

struct BrRadiusResult {
  std::optional<double> radius;
  int br = 0;
};

// Stability radius: for a unique best response pi* to sigma over pop,
// radius = gamma / (2L) with gamma the minimum payoff gap and L the maximum
// L2 norm of payoff-vector differences over competitors.  Returns nullopt
// when the BR ties or when L <= kTieTol with a nonempty competitor set;
// returns +infinity when there are no competitors.
BrRadiusResult unique_br_radius(const Game& game, const Population& pop,
                                const MixedStrategy& sigma);

}  // namespace psrolab

#endif  // PSROLAB_LANDSCAPE_HPP_
