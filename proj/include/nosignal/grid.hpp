#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nosignal/common.hpp"
#include "nosignal/fft.hpp"

namespace nosignal {

// Dual lattice for a particle boxed on [-L, L) with periodic boundary
// conditions. Position nodes y_n = -L + n dy with dy = 2L/N; wavenumber
// nodes k_j = (j - N/2) dk with dk = pi/L. N dy dk = 2 pi exactly, so the
// two bases below invert each other exactly.
struct GridSpec {
  double half_width = 0.0;          // L
  std::size_t num_points = 0;       // N, even
  double node_spacing = 0.0;        // dy
  double wavenumber_spacing = 0.0;  // dk

  double position_node(std::size_t n) const {
    return -half_width + node_spacing * static_cast<double>(n);
  }
  double wavenumber_node(std::size_t j) const {
    return wavenumber_spacing *
           (static_cast<double>(j) - static_cast<double>(num_points / 2));
  }
  double nyquist() const {
    return wavenumber_spacing * static_cast<double>(num_points / 2);
  }

  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double half_width, std::size_t num_points);

// Change of basis between position samples f(y_n) and the coefficients F_j
// of the box modes exp(i k_j y) / sqrt(N):
//   F_j = N^{-1/2} sum_n f_n exp(-i k_j y_n)
//   f_n = N^{-1/2} sum_j F_j exp(+i k_j y_n)
// Both directions are unitary, so sum |f|^2 = sum |F|^2. Physical densities
// attach the lattice weights dy and dk at the observable layer; the
// transforms themselves stay weight-free.
std::vector<cx> to_spectrum(std::span<const cx> field, const GridSpec& grid);
std::vector<cx> from_spectrum(std::span<const cx> spectrum, const GridSpec& grid);

// In-place forms used by the array kernels; data must have plan length.
void centered_to_spectrum(const FftPlan& plan, cx* data);
void centered_from_spectrum(const FftPlan& plan, cx* data);

}  // namespace nosignal
