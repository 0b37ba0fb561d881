#include "nosignal/kernels.hpp"

#include <algorithm>
#include <vector>

#include "nosignal/grid.hpp"

namespace nosignal::kernels {

namespace {

// Shared per-element helpers. Both the parallel kernels and the serial twins
// call exactly these, so the arithmetic per element is compiled once and the
// two paths cannot drift apart numerically.

void transform_column(cx* psi, std::size_t n, std::size_t j, const FftPlan& plan,
                      bool forward, cx* scratch) {
  for (std::size_t i = 0; i < n; ++i) scratch[i] = psi[i * n + j];
  forward ? centered_to_spectrum(plan, scratch) : centered_from_spectrum(plan, scratch);
  for (std::size_t i = 0; i < n; ++i) psi[i * n + j] = scratch[i];
}

void transform_row(cx* psi, std::size_t n, std::size_t i, const FftPlan& plan,
                   bool forward) {
  cx* row = psi + i * n;
  forward ? centered_to_spectrum(plan, row) : centered_from_spectrum(plan, row);
}

void phase_row_axis1(cx* psi, std::size_t n, std::size_t i, cx f) {
  cx* row = psi + i * n;
  for (std::size_t j = 0; j < n; ++j) row[j] *= f;
}

void phase_row_axis2(cx* psi, std::size_t n, std::size_t i, const cx* f2) {
  cx* row = psi + i * n;
  for (std::size_t j = 0; j < n; ++j) row[j] *= f2[j];
}

void phase_row_both(cx* psi, std::size_t n, std::size_t i, cx f1, const cx* f2) {
  cx* row = psi + i * n;
  for (std::size_t j = 0; j < n; ++j) row[j] *= f1 * f2[j];
}

double range_sumsq(const cx* data, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t t = begin; t < end; ++t) acc += std::norm(data[t]);
  return acc;
}

double column_sumsq(const cx* psi, std::size_t n, std::size_t j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(psi[i * n + j]);
  return acc;
}

void matvec_row(const cx* op, const cx* in, cx* out, std::size_t n, std::size_t i) {
  cx* dst = out + i * n;
  std::fill(dst, dst + n, cx(0.0, 0.0));
  const cx* row = op + i * n;
  for (std::size_t l = 0; l < n; ++l) {
    const cx w = row[l];
    const cx* src = in + l * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] += w * src[j];
  }
}

double gram_row_defect(const cx* op, std::size_t n, std::size_t a) {
  double worst = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    cx g(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) g += std::conj(op[i * n + a]) * op[i * n + b];
    if (b == a) g -= cx(1.0, 0.0);
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

void scale_range(cx* data, std::size_t begin, std::size_t end, double factor) {
  for (std::size_t t = begin; t < end; ++t) data[t] *= factor;
}

// Reduction chunking is fixed, never derived from the thread count, so the
// summation order is a property of the input size alone.
constexpr std::size_t kChunk = 4096;

std::size_t chunk_count(std::size_t count) { return (count + kChunk - 1) / kChunk; }

}  // namespace

void spectrum_axis1(cx* psi, std::size_t n, const FftPlan& plan, bool forward) {
#pragma omp parallel
  {
    std::vector<cx> scratch(n);
#pragma omp for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
      transform_column(psi, n, j, plan, forward, scratch.data());
    }
  }
}

void spectrum_axis2(cx* psi, std::size_t n, const FftPlan& plan, bool forward) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) transform_row(psi, n, i, plan, forward);
}

void phase_axis1(cx* psi, std::size_t n, const cx* f1) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) phase_row_axis1(psi, n, i, f1[i]);
}

void phase_axis2(cx* psi, std::size_t n, const cx* f2) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) phase_row_axis2(psi, n, i, f2);
}

void phase_both(cx* psi, std::size_t n, const cx* f1, const cx* f2) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) phase_row_both(psi, n, i, f1[i], f2);
}

double squared_norm(const cx* data, std::size_t count) {
  const std::size_t chunks = chunk_count(count);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    partial[c] = range_sumsq(data, c * kChunk, std::min(count, (c + 1) * kChunk));
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) acc += partial[c];
  return acc;
}

void sumsq_over_axis1(const cx* psi, std::size_t n, double* out) {
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) out[j] = column_sumsq(psi, n, j);
}

void sumsq_over_axis2(const cx* psi, std::size_t n, double* out) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) out[i] = range_sumsq(psi + i * n, 0, n);
}

void matrix_axis1(const cx* op, const cx* in, cx* out, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) matvec_row(op, in, out, n, i);
}

double unitarity_defect(const cx* op, std::size_t n) {
  std::vector<double> partial(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < n; ++a) partial[a] = gram_row_defect(op, n, a);
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) worst = std::max(worst, partial[a]);
  return worst;
}

void scale(cx* data, std::size_t count, double factor) {
  const std::size_t chunks = chunk_count(count);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    scale_range(data, c * kChunk, std::min(count, (c + 1) * kChunk), factor);
  }
}

namespace ref {

void spectrum_axis1(cx* psi, std::size_t n, const FftPlan& plan, bool forward) {
  std::vector<cx> scratch(n);
  for (std::size_t j = 0; j < n; ++j) {
    transform_column(psi, n, j, plan, forward, scratch.data());
  }
}

void spectrum_axis2(cx* psi, std::size_t n, const FftPlan& plan, bool forward) {
  for (std::size_t i = 0; i < n; ++i) transform_row(psi, n, i, plan, forward);
}

void phase_axis1(cx* psi, std::size_t n, const cx* f1) {
  for (std::size_t i = 0; i < n; ++i) phase_row_axis1(psi, n, i, f1[i]);
}

void phase_axis2(cx* psi, std::size_t n, const cx* f2) {
  for (std::size_t i = 0; i < n; ++i) phase_row_axis2(psi, n, i, f2);
}

void phase_both(cx* psi, std::size_t n, const cx* f1, const cx* f2) {
  for (std::size_t i = 0; i < n; ++i) phase_row_both(psi, n, i, f1[i], f2);
}

double squared_norm(const cx* data, std::size_t count) {
  const std::size_t chunks = chunk_count(count);
  std::vector<double> partial(chunks, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    partial[c] = range_sumsq(data, c * kChunk, std::min(count, (c + 1) * kChunk));
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) acc += partial[c];
  return acc;
}

void sumsq_over_axis1(const cx* psi, std::size_t n, double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = column_sumsq(psi, n, j);
}

void sumsq_over_axis2(const cx* psi, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = range_sumsq(psi + i * n, 0, n);
}

void matrix_axis1(const cx* op, const cx* in, cx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) matvec_row(op, in, out, n, i);
}

double unitarity_defect(const cx* op, std::size_t n) {
  std::vector<double> partial(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) partial[a] = gram_row_defect(op, n, a);
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) worst = std::max(worst, partial[a]);
  return worst;
}

void scale(cx* data, std::size_t count, double factor) {
  const std::size_t chunks = chunk_count(count);
  for (std::size_t c = 0; c < chunks; ++c) {
    scale_range(data, c * kChunk, std::min(count, (c + 1) * kChunk), factor);
  }
}

}  // namespace ref

}  // namespace nosignal::kernels
