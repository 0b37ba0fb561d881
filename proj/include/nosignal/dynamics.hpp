#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "nosignal/entangle.hpp"

namespace nosignal {

// Raised-cosine slit in the particle-1 beam line: zero inside the aperture,
// rising smoothly to barrier_height over edge_smoothing on each side. The
// smooth edge caps the momentum a bounce can transfer at about pi over
// edge_smoothing, keeping scattered waves inside the resolvable band.
struct SlitScreen {
  double center = 0.0;
  double half_width = 0.0;      // aperture half-opening; 0 closes the slit
  double barrier_height = 0.0;  // > 0
  double edge_smoothing = 0.0;  // > 0
};

double slit_height_at(const SlitScreen& slit, double y);

// Operations local to particle 1. FreeOnly switches the potential off but
// still runs the stepping loop; Potential samples profile(y, t) at substep
// midpoints when time_dependent; ExplicitUnitary is a dense operator on the
// particle-1 axis and must pass the unitarity gate.
struct FreeOnly {};

struct Potential {
  std::function<double(double y, double t)> profile;
  bool time_dependent = false;
};

struct ExplicitUnitary {
  std::vector<cx> matrix;  // num_points^2, row-major
};

using StepOperation = std::variant<FreeOnly, Potential, ExplicitUnitary>;

// Piecewise schedule: timed entries run under the splitting integrator for
// their duration; ExplicitUnitary entries fire instantaneously and must
// carry duration zero.
struct Schedule {
  struct Entry {
    StepOperation op;
    double duration = 0.0;
  };
  std::vector<Entry> entries;
};

using LocalOperation = std::variant<FreeOnly, Potential, ExplicitUnitary, Schedule>;

// Exact spectral drift of both particles for time t >= 0; t = 0 returns the
// state unchanged, bit for bit.
BipartiteWave free_propagate(const BipartiteWave& state, double t);

// Symmetric splitting: half potential kick, exact spectral drift, half kick,
// n_steps times. For a Schedule, t_total must equal the summed durations and
// steps are shared across entries in proportion to duration.
BipartiteWave split_step(const BipartiteWave& state, const LocalOperation& op,
                         double t_total, int n_steps);

// Applies a dense particle-1 operator after checking the Gram defect
// max |(U^dag U - I)_ab| <= 1e-10; throws NonUnitaryError otherwise.
BipartiteWave apply_local_unitary(const BipartiteWave& state, std::span<const cx> op);

// Static raised-edge barrier as a step-operation potential; usable directly
// or as a Schedule entry.
Potential slit_operation(const SlitScreen& slit);

// Schedule of slit windows sharing one barrier profile; widths_and_durations
// holds (half_width, duration) pairs.
Schedule make_schedule_slit(const GridSpec& grid,
                            const std::vector<std::pair<double, double>>& widths_and_durations,
                            double barrier_height, double edge_smoothing);

// Haar-like random unitary: a seeded complex Gaussian matrix orthonormalized
// by modified Gram-Schmidt with one reorthogonalization pass.
std::vector<cx> seeded_random_unitary(std::size_t n, std::uint64_t seed);

// Grid-derived slit defaults, anchored to a reference wavenumber of one
// fifth of the Nyquist value: a barrier at twice the reference kinetic
// energy, reflective rather than a thin phase imprint, and a window lasting
// one box traversal at the reference speed so the beam genuinely scatters.
double default_barrier_height(const GridSpec& grid, double mass1, double hbar = 1.0);
double default_edge_smoothing(const GridSpec& grid);
double default_slit_duration(const GridSpec& grid, double mass1, double hbar = 1.0);

}  // namespace nosignal
