#pragma once

#include <cstddef>

#include "nosignal/common.hpp"
#include "nosignal/fft.hpp"

// Array kernels for two-particle fields stored row-major with the particle-1
// node first: psi[i * n + j] = psi(y1_i, y2_j), n x n entries. Each kernel
// has a serial twin in kernels::ref built from the same per-element helpers,
// so serial and parallel runs agree bitwise for any thread count. Reductions
// accumulate fixed-size chunks in index order for the same reason.
namespace nosignal::kernels {

// Centered unitary transform applied along one axis (axis 1 = columns,
// axis 2 = rows); forward maps position to spectrum.
void spectrum_axis1(cx* psi, std::size_t n, const FftPlan& plan, bool forward);
void spectrum_axis2(cx* psi, std::size_t n, const FftPlan& plan, bool forward);

// Diagonal factors: psi(i,j) *= f1[i], psi(i,j) *= f2[j], or both at once.
void phase_axis1(cx* psi, std::size_t n, const cx* f1);
void phase_axis2(cx* psi, std::size_t n, const cx* f2);
void phase_both(cx* psi, std::size_t n, const cx* f1, const cx* f2);

// sum |z|^2 over a flat range.
double squared_norm(const cx* data, std::size_t count);

// out[j] = sum_i |psi(i,j)|^2 and out[i] = sum_j |psi(i,j)|^2.
void sumsq_over_axis1(const cx* psi, std::size_t n, double* out);
void sumsq_over_axis2(const cx* psi, std::size_t n, double* out);

// out(i,j) = sum_l op(i,l) in(l,j); op is n x n row-major, in/out distinct.
void matrix_axis1(const cx* op, const cx* in, cx* out, std::size_t n);

// max_ab |(op^dag op - I)_ab|.
double unitarity_defect(const cx* op, std::size_t n);

void scale(cx* data, std::size_t count, double factor);

namespace ref {

void spectrum_axis1(cx* psi, std::size_t n, const FftPlan& plan, bool forward);
void spectrum_axis2(cx* psi, std::size_t n, const FftPlan& plan, bool forward);
void phase_axis1(cx* psi, std::size_t n, const cx* f1);
void phase_axis2(cx* psi, std::size_t n, const cx* f2);
void phase_both(cx* psi, std::size_t n, const cx* f1, const cx* f2);
double squared_norm(const cx* data, std::size_t count);
void sumsq_over_axis1(const cx* psi, std::size_t n, double* out);
void sumsq_over_axis2(const cx* psi, std::size_t n, double* out);
void matrix_axis1(const cx* op, const cx* in, cx* out, std::size_t n);
double unitarity_defect(const cx* op, std::size_t n);
void scale(cx* data, std::size_t count, double factor);

}  // namespace ref

}  // namespace nosignal::kernels
