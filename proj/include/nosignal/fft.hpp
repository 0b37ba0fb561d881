#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "nosignal/common.hpp"

namespace nosignal {

// Unscaled discrete Fourier transform for one fixed length:
//   forward: X_j = sum_n x_n exp(-2 pi i j n / N)
//   inverse: x_n = sum_j X_j exp(+2 pi i j n / N)   (no 1/N factor)
// Power-of-two lengths run an iterative radix-2 pass; other lengths go
// through the chirp-z identity with a power-of-two convolution. A plan holds
// only immutable tables, so one plan may serve many threads at once.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  void forward(cx* data) const;
  void inverse(cx* data) const;

 private:
  void radix2(cx* data, bool invert) const;
  void chirp(cx* data, bool invert) const;

  std::size_t n_ = 0;
  bool pow2_ = false;

  // radix-2 tables (power-of-two lengths)
  std::vector<std::size_t> bitrev_;
  std::vector<cx> twiddle_;  // exp(-2 pi i t / n), t in [0, n/2)

  // chirp-z tables (general lengths)
  std::size_t conv_n_ = 0;
  std::shared_ptr<const FftPlan> conv_;
  std::vector<cx> chirp_;         // exp(-i pi n^2 / N), reduced mod 2N exactly
  std::vector<cx> chirp_kernel_;  // forward transform of the padded conjugate chirp
};

// Process-wide plan cache; plans are immutable, sharing is safe.
std::shared_ptr<const FftPlan> shared_fft_plan(std::size_t n);

}  // namespace nosignal
