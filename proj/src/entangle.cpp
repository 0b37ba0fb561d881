#include "nosignal/entangle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nosignal/kernels.hpp"

namespace nosignal {

SpectralAmplitude::SpectralAmplitude(GridSpec grid, std::vector<cx> values,
                                     double band_limit)
    : grid_(grid), values_(std::move(values)), band_limit_(band_limit) {
  if (values_.size() != grid_.num_points) {
    throw std::invalid_argument("SpectralAmplitude: length does not match the grid");
  }
  if (!(std::isfinite(band_limit_) && band_limit_ > 0.0 &&
        band_limit_ < grid_.nyquist())) {
    throw std::invalid_argument(
        "SpectralAmplitude: band_limit must lie strictly inside (0, nyquist)");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const cx w = values_[j];
    if (!(std::isfinite(w.real()) && std::isfinite(w.imag()))) {
      throw std::invalid_argument("SpectralAmplitude: non-finite weight");
    }
    if (std::abs(grid_.wavenumber_node(j)) > band_limit_ && w != cx(0.0, 0.0)) {
      throw std::invalid_argument("SpectralAmplitude: weight outside the band");
    }
    sum += std::norm(w);
  }
  const double total = sum * grid_.wavenumber_spacing;
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("SpectralAmplitude: weights are not normalized");
  }
}

SpectralAmplitude gaussian_band(const GridSpec& grid, double sigma_k, double k_cut) {
  if (grid.num_points == 0) {
    throw std::invalid_argument("gaussian_band: grid is empty");
  }
  if (!(std::isfinite(sigma_k) && sigma_k > 0.0)) {
    throw std::invalid_argument("gaussian_band: sigma_k must be finite and positive");
  }
  if (!(std::isfinite(k_cut) && k_cut > 0.0 && k_cut < grid.nyquist())) {
    throw std::invalid_argument(
        "gaussian_band: k_cut must lie strictly inside (0, nyquist)");
  }
  std::vector<cx> values(grid.num_points, cx(0.0, 0.0));
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    const double k = grid.wavenumber_node(j);
    if (std::abs(k) > k_cut) continue;
    const double w = std::exp(-k * k / (2.0 * sigma_k * sigma_k));
    values[j] = cx(w, 0.0);
    sum += w * w;
  }
  const double scale = 1.0 / std::sqrt(sum * grid.wavenumber_spacing);
  for (auto& v : values) v *= scale;
  return SpectralAmplitude(grid, std::move(values), k_cut);
}

SpectralAmplitude randomize_phase(const SpectralAmplitude& weights,
                                  std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<cx> values = weights.values();
  for (auto& v : values) {
    const double phi = 2.0 * std::numbers::pi * uniform_unit(eng);
    v *= cx(std::cos(phi), std::sin(phi));
  }
  return SpectralAmplitude(weights.grid(), std::move(values), weights.band_limit());
}

double weighted_norm_sq(const BipartiteWave& state) {
  const double dy = state.grid.node_spacing;
  return kernels::squared_norm(state.amplitudes.data(), state.amplitudes.size()) *
         dy * dy;
}

BipartiteWave build_epr_state(const SpectralAmplitude& weights, double mass1,
                              double mass2, double hbar) {
  const GridSpec& grid = weights.grid();
  if (!(std::isfinite(mass1) && mass1 > 0.0) ||
      !(std::isfinite(mass2) && mass2 > 0.0)) {
    throw std::invalid_argument("build_epr_state: masses must be finite and positive");
  }
  if (!(std::isfinite(hbar) && hbar > 0.0)) {
    throw std::invalid_argument("build_epr_state: hbar must be finite and positive");
  }

  const std::size_t n = grid.num_points;
  BipartiteWave state;
  state.grid = grid;
  state.mass1 = mass1;
  state.mass2 = mass2;
  state.hbar = hbar;
  state.amplitudes.assign(n * n, cx(0.0, 0.0));

  // Node j2 holds wavenumber k = (j2 - N/2) dk; the mirror node for -k is
  // N - j2. The band invariant keeps node 0 (the unpaired -nyquist node)
  // empty, so the mirror index never leaves the lattice.
  for (std::size_t j2 = 0; j2 < n; ++j2) {
    const cx w = weights.values()[j2];
    if (w == cx(0.0, 0.0)) continue;
    const std::size_t j1 = n - j2;
    state.amplitudes[j1 * n + j2] = w;
  }

  const auto plan = shared_fft_plan(n);
  kernels::spectrum_axis1(state.amplitudes.data(), n, *plan, false);
  kernels::spectrum_axis2(state.amplitudes.data(), n, *plan, false);

  const double raw = weighted_norm_sq(state);
  kernels::scale(state.amplitudes.data(), state.amplitudes.size(),
                 1.0 / std::sqrt(raw));
  return state;
}

}  // namespace nosignal
