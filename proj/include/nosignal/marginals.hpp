#pragma once

#include <cstddef>
#include <vector>

#include "nosignal/entangle.hpp"

namespace nosignal {

// Probability ledger on the wavenumber lattice: values >= 0 and
// sum values dk = 1 to 1e-12, enforced at construction.
class WavenumberDistribution {
 public:
  WavenumberDistribution(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

// Two-axis spectral amplitudes with physical weights attached:
// sum |Phi|^2 dk^2 = 1. Row-major, particle-1 wavenumber first.
std::vector<cx> spectral_components(const BipartiteWave& state);

// Momentum-side distribution of particle 2 alone, obtained by summing the
// full two-axis spectrum over the particle-1 axis: D_j = sum_i |Phi_ij|^2 dk.
// The reduction deliberately runs through the complete joint spectrum rather
// than a single-axis shortcut, so invariance of D under particle-1
// operations is measured, not built in.
WavenumberDistribution particle2_distribution(const BipartiteWave& state);

// Position density of one particle (axis 1 or 2); sum values dy = 1.
std::vector<double> position_marginal(const BipartiteWave& state, int axis);

// Far-field readout: a component at wavenumber k lands at y = hbar k t / m,
// so the screen density is the wavenumber distribution under a linear
// change of variable.
struct ScreenProfile {
  std::vector<double> position;
  std::vector<double> density;
  double spacing = 0.0;
};

ScreenProfile screen_profile(const WavenumberDistribution& dist, double flight_time,
                             double mass, double hbar = 1.0);

struct DistributionDistance {
  double max_abs = 0.0;
  double total_variation = 0.0;  // (1/2) sum |a - b| dk
};

DistributionDistance distribution_distance(const WavenumberDistribution& a,
                                           const WavenumberDistribution& b);

// Probability mass at nodes with |k| > band_limit.
double band_mass_outside(const WavenumberDistribution& dist, double band_limit);

// Standard deviation of the wavenumber under the distribution.
double spectral_width(const WavenumberDistribution& dist);

}  // namespace nosignal
