// Shared numeric types, tolerances and error taxonomy for psrolab.
#ifndef PSROLAB_COMMON_HPP_
#define PSROLAB_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace psrolab {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

// Numerical tolerances used across the library.  All comparisons against
// these are documented at the use site.
inline constexpr double kSymTol = 1e-9;       // skew-symmetry validation
inline constexpr double kProbTol = 1e-9;      // mixture validation
inline constexpr double kTieTol = 1e-9;       // tie detection in argmax sets
inline constexpr double kLpTol = 1e-9;        // LP optimality / residual bound
inline constexpr double kConvergeTol = 1e-8;  // PSRO convergence threshold

// Error taxonomy.  Callers can catch the base class or a specific kind.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ForgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic seed derivation (splitmix64 over a running state).  Used to
// hand independent sub-streams to nested components without correlation.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace psrolab

#endif  // PSROLAB_COMMON_HPP_
