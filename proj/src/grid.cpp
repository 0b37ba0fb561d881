#include "nosignal/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nosignal {

GridSpec make_grid(double half_width, std::size_t num_points) {
  if (!(std::isfinite(half_width) && half_width > 0.0)) {
    throw std::invalid_argument("make_grid: half_width must be finite and positive");
  }
  if (num_points < 8 || num_points % 2 != 0) {
    throw std::invalid_argument("make_grid: num_points must be even and at least 8");
  }
  GridSpec g;
  g.half_width = half_width;
  g.num_points = num_points;
  g.node_spacing = 2.0 * half_width / static_cast<double>(num_points);
  g.wavenumber_spacing = std::numbers::pi / half_width;
  return g;
}

// k_j y_n = -(j - N/2) pi + (j - N/2) n (2 pi / N), so the centered kernel
// exp(-i k_j y_n) is a plain DFT kernel dressed with the exact sign flips
// (-1)^{j + N/2} and (-1)^n. No trigonometric phase corrections are needed.
void centered_to_spectrum(const FftPlan& plan, cx* data) {
  const std::size_t n = plan.size();
  for (std::size_t i = 1; i < n; i += 2) data[i] = -data[i];
  plan.forward(data);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const std::size_t half = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    data[j] *= ((j + half) & 1u) ? -scale : scale;
  }
}

void centered_from_spectrum(const FftPlan& plan, cx* data) {
  const std::size_t n = plan.size();
  const std::size_t half = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    if ((j + half) & 1u) data[j] = -data[j];
  }
  plan.inverse(data);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    data[i] *= (i & 1u) ? -scale : scale;
  }
}

namespace {

std::vector<cx> checked_copy(std::span<const cx> input, const GridSpec& grid,
                             const char* where) {
  if (grid.num_points == 0) {
    throw std::invalid_argument(std::string(where) + ": grid is empty");
  }
  if (input.size() != grid.num_points) {
    throw std::invalid_argument(std::string(where) +
                                ": input length does not match the grid");
  }
  return std::vector<cx>(input.begin(), input.end());
}

}  // namespace

std::vector<cx> to_spectrum(std::span<const cx> field, const GridSpec& grid) {
  auto out = checked_copy(field, grid, "to_spectrum");
  const auto plan = shared_fft_plan(grid.num_points);
  centered_to_spectrum(*plan, out.data());
  return out;
}

std::vector<cx> from_spectrum(std::span<const cx> spectrum, const GridSpec& grid) {
  auto out = checked_copy(spectrum, grid, "from_spectrum");
  const auto plan = shared_fft_plan(grid.num_points);
  centered_from_spectrum(*plan, out.data());
  return out;
}

}  // namespace nosignal
