#include "nosignal/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace nosignal {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n_ == 0) throw std::invalid_argument("FftPlan: length must be positive");
  pow2_ = is_pow2(n_);
  if (pow2_) {
    bitrev_.assign(n_, 0);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n_) ++bits;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
    twiddle_.resize(n_ / 2);
    for (std::size_t t = 0; t < n_ / 2; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(t) /
                           static_cast<double>(n_);
      twiddle_[t] = cx(std::cos(angle), std::sin(angle));
    }
    return;
  }

  // Bluestein: X_j = c_j sum_n (x_n c_n) conj(c)_{j-n} with c_n = e^{-i pi n^2/N},
  // evaluated as one circular convolution of power-of-two length >= 2N - 1.
  // The square is reduced mod 2N in integer arithmetic so the chirp phase
  // stays exact for large indices.
  conv_n_ = next_pow2(2 * n_ - 1);
  conv_ = std::make_shared<const FftPlan>(conv_n_);
  chirp_.resize(n_);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::uint64_t sq = (static_cast<std::uint64_t>(i) * i) % two_n;
    const double angle =
        -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n_);
    chirp_[i] = cx(std::cos(angle), std::sin(angle));
  }
  std::vector<cx> pad(conv_n_, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n_; ++i) {
    const cx b = std::conj(chirp_[i]);
    pad[i] = b;
    if (i != 0) pad[conv_n_ - i] = b;
  }
  conv_->forward(pad.data());
  chirp_kernel_ = std::move(pad);
}

void FftPlan::radix2(cx* a, bool invert) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cx w = twiddle_[k * stride];
        if (invert) w = std::conj(w);
        const cx u = a[start + k];
        const cx v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

void FftPlan::chirp(cx* data, bool invert) const {
  const std::size_t n = n_;
  if (invert) {
    for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
  }
  std::vector<cx> work(conv_n_, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) work[i] = data[i] * chirp_[i];
  conv_->forward(work.data());
  for (std::size_t i = 0; i < conv_n_; ++i) work[i] *= chirp_kernel_[i];
  conv_->inverse(work.data());
  const double inv_m = 1.0 / static_cast<double>(conv_n_);
  for (std::size_t i = 0; i < n; ++i) data[i] = work[i] * inv_m * chirp_[i];
  if (invert) {
    for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(data[i]);
  }
}

void FftPlan::forward(cx* data) const {
  if (n_ == 1) return;
  pow2_ ? radix2(data, false) : chirp(data, false);
}

void FftPlan::inverse(cx* data) const {
  if (n_ == 1) return;
  pow2_ ? radix2(data, true) : chirp(data, true);
}

std::shared_ptr<const FftPlan> shared_fft_plan(std::size_t n) {
  static std::mutex guard;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  {
    std::lock_guard<std::mutex> lock(guard);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  auto plan = std::make_shared<const FftPlan>(n);
  std::lock_guard<std::mutex> lock(guard);
  auto [it, inserted] = cache.emplace(n, std::move(plan));
  return it->second;
}

}  // namespace nosignal
