#pragma once

#include <cstdint>
#include <vector>

#include "nosignal/grid.hpp"

namespace nosignal {

// Band-limited spectral weights W on the wavenumber lattice. Invariants,
// enforced at construction: sum |W_j|^2 dk = 1 to 1e-12, W is exactly zero
// outside |k| <= band_limit, and band_limit < nyquist so every occupied node
// has its mirror node at -k on the lattice.
class SpectralAmplitude {
 public:
  SpectralAmplitude(GridSpec grid, std::vector<cx> values, double band_limit);

  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<cx>& values() const noexcept { return values_; }
  double band_limit() const noexcept { return band_limit_; }

 private:
  GridSpec grid_;
  std::vector<cx> values_;
  double band_limit_;
};

// Gaussian weights exp(-k^2 / (2 sigma_k^2)) truncated to |k| <= k_cut and
// normalized on the lattice.
SpectralAmplitude gaussian_band(const GridSpec& grid, double sigma_k, double k_cut);

// W_j -> W_j exp(i phi_j) with phi_j drawn uniformly from [0, 2 pi) by a
// seeded generator; moduli and band are unchanged.
SpectralAmplitude randomize_phase(const SpectralAmplitude& weights, std::uint64_t seed);

// Two-particle position-space state on a shared lattice, row-major with the
// particle-1 node first; sum |psi|^2 dy^2 = 1.
struct BipartiteWave {
  GridSpec grid;
  std::vector<cx> amplitudes;  // num_points^2 entries
  double mass1 = 1.0;
  double mass2 = 1.0;
  double hbar = 1.0;

  cx at(std::size_t i, std::size_t j) const {
    return amplitudes[i * grid.num_points + j];
  }
};

double weighted_norm_sq(const BipartiteWave& state);

// Opposite-momentum pair source: wherever particle 2 carries exp(+i k y2),
// particle 1 carries exp(-i k y1), weighted by W(k). Assembled on the
// spectral anti-diagonal k1 = -k2, brought to position space, normalized.
BipartiteWave build_epr_state(const SpectralAmplitude& weights, double mass1,
                              double mass2, double hbar = 1.0);

}  // namespace nosignal
