#include "nosignal/marginals.hpp"

#include <cmath>
#include <stdexcept>

#include "nosignal/kernels.hpp"

namespace nosignal {

WavenumberDistribution::WavenumberDistribution(GridSpec grid,
                                               std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.num_points) {
    throw std::invalid_argument(
        "WavenumberDistribution: length does not match the grid");
  }
  double sum = 0.0;
  for (double v : values_) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      throw std::invalid_argument("WavenumberDistribution: negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum * grid_.wavenumber_spacing - 1.0) > 1e-12) {
    throw std::invalid_argument("WavenumberDistribution: values are not normalized");
  }
}

std::vector<cx> spectral_components(const BipartiteWave& state) {
  const std::size_t n = state.grid.num_points;
  if (state.amplitudes.size() != n * n) {
    throw std::invalid_argument("spectral_components: state length mismatch");
  }
  std::vector<cx> spec = state.amplitudes;
  const auto plan = shared_fft_plan(n);
  kernels::spectrum_axis1(spec.data(), n, *plan, true);
  kernels::spectrum_axis2(spec.data(), n, *plan, true);
  kernels::scale(spec.data(), spec.size(),
                 state.grid.node_spacing / state.grid.wavenumber_spacing);
  return spec;
}

WavenumberDistribution particle2_distribution(const BipartiteWave& state) {
  const std::size_t n = state.grid.num_points;
  const std::vector<cx> spec = spectral_components(state);
  std::vector<double> values(n, 0.0);
  kernels::sumsq_over_axis1(spec.data(), n, values.data());
  const double dk = state.grid.wavenumber_spacing;
  for (auto& v : values) v *= dk;
  return WavenumberDistribution(state.grid, std::move(values));
}

std::vector<double> position_marginal(const BipartiteWave& state, int axis) {
  const std::size_t n = state.grid.num_points;
  if (state.amplitudes.size() != n * n) {
    throw std::invalid_argument("position_marginal: state length mismatch");
  }
  if (axis != 1 && axis != 2) {
    throw std::invalid_argument("position_marginal: axis must be 1 or 2");
  }
  std::vector<double> values(n, 0.0);
  if (axis == 1) {
    kernels::sumsq_over_axis2(state.amplitudes.data(), n, values.data());
  } else {
    kernels::sumsq_over_axis1(state.amplitudes.data(), n, values.data());
  }
  const double dy = state.grid.node_spacing;
  for (auto& v : values) v *= dy;
  return values;
}

ScreenProfile screen_profile(const WavenumberDistribution& dist, double flight_time,
                             double mass, double hbar) {
  if (!(std::isfinite(flight_time) && flight_time > 0.0)) {
    throw std::invalid_argument("screen_profile: flight_time must be positive");
  }
  if (!(std::isfinite(mass) && mass > 0.0) || !(std::isfinite(hbar) && hbar > 0.0)) {
    throw std::invalid_argument("screen_profile: mass and hbar must be positive");
  }
  const std::size_t n = dist.grid().num_points;
  const double stretch = hbar * flight_time / mass;  // dy_screen / dk
  ScreenProfile profile;
  profile.spacing = stretch * dist.grid().wavenumber_spacing;
  profile.position.resize(n);
  profile.density.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    profile.position[j] = stretch * dist.grid().wavenumber_node(j);
    profile.density[j] = dist.values()[j] / stretch;
  }
  return profile;
}

DistributionDistance distribution_distance(const WavenumberDistribution& a,
                                           const WavenumberDistribution& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("distribution_distance: grids differ");
  }
  DistributionDistance d;
  double sum = 0.0;
  for (std::size_t j = 0; j < a.values().size(); ++j) {
    const double diff = std::abs(a.values()[j] - b.values()[j]);
    if (diff > d.max_abs) d.max_abs = diff;
    sum += diff;
  }
  d.total_variation = 0.5 * sum * a.grid().wavenumber_spacing;
  return d;
}

double band_mass_outside(const WavenumberDistribution& dist, double band_limit) {
  if (!(std::isfinite(band_limit) && band_limit >= 0.0)) {
    throw std::invalid_argument("band_mass_outside: band_limit must be non-negative");
  }
  double mass = 0.0;
  for (std::size_t j = 0; j < dist.values().size(); ++j) {
    if (std::abs(dist.grid().wavenumber_node(j)) > band_limit) {
      mass += dist.values()[j];
    }
  }
  return mass * dist.grid().wavenumber_spacing;
}

double spectral_width(const WavenumberDistribution& dist) {
  const double dk = dist.grid().wavenumber_spacing;
  double mean = 0.0;
  for (std::size_t j = 0; j < dist.values().size(); ++j) {
    mean += dist.grid().wavenumber_node(j) * dist.values()[j];
  }
  mean *= dk;
  double var = 0.0;
  for (std::size_t j = 0; j < dist.values().size(); ++j) {
    const double d = dist.grid().wavenumber_node(j) - mean;
    var += d * d * dist.values()[j];
  }
  var *= dk;
  return std::sqrt(var);
}

}  // namespace nosignal
