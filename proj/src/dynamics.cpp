#include "nosignal/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nosignal/kernels.hpp"

namespace nosignal {

namespace {

void check_state(const BipartiteWave& state, const char* where) {
  const std::size_t n = state.grid.num_points;
  if (n == 0 || state.amplitudes.size() != n * n) {
    throw std::invalid_argument(std::string(where) + ": state length mismatch");
  }
  if (!(state.mass1 > 0.0 && state.mass2 > 0.0 && state.hbar > 0.0)) {
    throw std::invalid_argument(std::string(where) + ": non-positive mass or hbar");
  }
}

// Spectral drift factors exp(-i hbar k^2 dt / (2 m)) for one axis.
std::vector<cx> drift_factors(const GridSpec& grid, double mass, double hbar,
                              double dt) {
  std::vector<cx> f(grid.num_points);
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    const double k = grid.wavenumber_node(j);
    const double angle = -hbar * k * k * dt / (2.0 * mass);
    f[j] = cx(std::cos(angle), std::sin(angle));
  }
  return f;
}

void drift_in_place(BipartiteWave& state, double t) {
  const std::size_t n = state.grid.num_points;
  const auto plan = shared_fft_plan(n);
  const auto f1 = drift_factors(state.grid, state.mass1, state.hbar, t);
  const auto f2 = drift_factors(state.grid, state.mass2, state.hbar, t);
  kernels::spectrum_axis1(state.amplitudes.data(), n, *plan, true);
  kernels::spectrum_axis2(state.amplitudes.data(), n, *plan, true);
  kernels::phase_both(state.amplitudes.data(), n, f1.data(), f2.data());
  kernels::spectrum_axis1(state.amplitudes.data(), n, *plan, false);
  kernels::spectrum_axis2(state.amplitudes.data(), n, *plan, false);
}

std::vector<cx> kick_factors(const GridSpec& grid,
                             const std::function<double(double, double)>& profile,
                             double t, double dt, double hbar) {
  std::vector<cx> f(grid.num_points);
  for (std::size_t i = 0; i < grid.num_points; ++i) {
    const double v = profile(grid.position_node(i), t);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("split_step: potential profile is non-finite");
    }
    const double angle = -v * dt / (2.0 * hbar);
    f[i] = cx(std::cos(angle), std::sin(angle));
  }
  return f;
}

// Symmetric splitting over one segment of constant operation. Substep s
// covers [t0 + s dt, t0 + (s+1) dt]; a time-dependent profile is frozen at
// the substep midpoint, keeping the segment second-order in dt.
void evolve_potential(BipartiteWave& state, const Potential& pot, double t0,
                      double duration, int steps) {
  if (!pot.profile) {
    throw std::invalid_argument("split_step: potential has no profile");
  }
  const std::size_t n = state.grid.num_points;
  const double dt = duration / static_cast<double>(steps);
  const auto plan = shared_fft_plan(n);
  const auto f1 = drift_factors(state.grid, state.mass1, state.hbar, dt);
  const auto f2 = drift_factors(state.grid, state.mass2, state.hbar, dt);
  std::vector<cx> kick;
  if (!pot.time_dependent) {
    kick = kick_factors(state.grid, pot.profile, t0, dt, state.hbar);
  }
  for (int s = 0; s < steps; ++s) {
    if (pot.time_dependent) {
      const double t_mid = t0 + (static_cast<double>(s) + 0.5) * dt;
      kick = kick_factors(state.grid, pot.profile, t_mid, dt, state.hbar);
    }
    kernels::phase_axis1(state.amplitudes.data(), n, kick.data());
    kernels::spectrum_axis1(state.amplitudes.data(), n, *plan, true);
    kernels::spectrum_axis2(state.amplitudes.data(), n, *plan, true);
    kernels::phase_both(state.amplitudes.data(), n, f1.data(), f2.data());
    kernels::spectrum_axis1(state.amplitudes.data(), n, *plan, false);
    kernels::spectrum_axis2(state.amplitudes.data(), n, *plan, false);
    kernels::phase_axis1(state.amplitudes.data(), n, kick.data());
  }
}

void evolve_free(BipartiteWave& state, double duration, int steps) {
  const double dt = duration / static_cast<double>(steps);
  for (int s = 0; s < steps; ++s) drift_in_place(state, dt);
}

void apply_unitary_in_place(BipartiteWave& state, std::span<const cx> op,
                            const char* where) {
  const std::size_t n = state.grid.num_points;
  if (op.size() != n * n) {
    throw std::invalid_argument(std::string(where) + ": operator size mismatch");
  }
  const double defect = kernels::unitarity_defect(op.data(), n);
  if (!(defect <= kUnitarityTolerance)) {
    throw NonUnitaryError(std::string(where) + ": operator fails the Gram test",
                          defect);
  }
  std::vector<cx> out(n * n);
  kernels::matrix_axis1(op.data(), state.amplitudes.data(), out.data(), n);
  state.amplitudes = std::move(out);
}

}  // namespace

double slit_height_at(const SlitScreen& slit, double y) {
  const double d = std::abs(y - slit.center);
  if (d <= slit.half_width) return 0.0;
  const double rise = d - slit.half_width;
  if (rise >= slit.edge_smoothing) return slit.barrier_height;
  return slit.barrier_height * 0.5 *
         (1.0 - std::cos(std::numbers::pi * rise / slit.edge_smoothing));
}

BipartiteWave free_propagate(const BipartiteWave& state, double t) {
  check_state(state, "free_propagate");
  if (!(std::isfinite(t) && t >= 0.0)) {
    throw std::invalid_argument("free_propagate: time must be finite and >= 0");
  }
  BipartiteWave out = state;
  if (t == 0.0) return out;
  drift_in_place(out, t);
  return out;
}

BipartiteWave split_step(const BipartiteWave& state, const LocalOperation& op,
                         double t_total, int n_steps) {
  check_state(state, "split_step");
  if (!(std::isfinite(t_total) && t_total > 0.0)) {
    throw std::invalid_argument("split_step: t_total must be positive");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("split_step: n_steps must be at least 1");
  }

  BipartiteWave out = state;
  if (std::holds_alternative<FreeOnly>(op)) {
    evolve_free(out, t_total, n_steps);
    return out;
  }
  if (const auto* pot = std::get_if<Potential>(&op)) {
    evolve_potential(out, *pot, 0.0, t_total, n_steps);
    return out;
  }
  if (std::holds_alternative<ExplicitUnitary>(op)) {
    throw std::invalid_argument(
        "split_step: an explicit operator has no generator to integrate; apply it "
        "directly or as a zero-duration schedule entry");
  }

  const auto& schedule = std::get<Schedule>(op);
  if (schedule.entries.empty()) {
    throw std::invalid_argument("split_step: schedule is empty");
  }
  double total = 0.0;
  for (const auto& entry : schedule.entries) {
    if (!(std::isfinite(entry.duration) && entry.duration >= 0.0)) {
      throw std::invalid_argument("split_step: schedule durations must be >= 0");
    }
    const bool instant = std::holds_alternative<ExplicitUnitary>(entry.op);
    if (instant && entry.duration != 0.0) {
      throw std::invalid_argument(
          "split_step: explicit operator entries must have zero duration");
    }
    if (!instant && entry.duration <= 0.0) {
      throw std::invalid_argument(
          "split_step: timed schedule entries need positive duration");
    }
    total += entry.duration;
  }
  if (std::abs(total - t_total) > 1e-9 * std::max(1.0, std::abs(t_total))) {
    throw std::invalid_argument(
        "split_step: t_total does not match the schedule duration");
  }

  // Steps go to timed entries in proportion to duration, one step minimum,
  // so refining n_steps refines every window. Midpoint times for
  // time-dependent profiles run on the schedule clock.
  double clock = 0.0;
  for (const auto& entry : schedule.entries) {
    if (const auto* u = std::get_if<ExplicitUnitary>(&entry.op)) {
      apply_unitary_in_place(out, u->matrix, "split_step");
      continue;
    }
    const double frac = entry.duration / total;
    const int steps = std::max(
        1, static_cast<int>(std::llround(static_cast<double>(n_steps) * frac)));
    if (std::holds_alternative<FreeOnly>(entry.op)) {
      evolve_free(out, entry.duration, steps);
    } else {
      evolve_potential(out, std::get<Potential>(entry.op), clock, entry.duration,
                       steps);
    }
    clock += entry.duration;
  }
  return out;
}

BipartiteWave apply_local_unitary(const BipartiteWave& state, std::span<const cx> op) {
  check_state(state, "apply_local_unitary");
  BipartiteWave out = state;
  apply_unitary_in_place(out, op, "apply_local_unitary");
  return out;
}

Potential slit_operation(const SlitScreen& slit) {
  if (!(std::isfinite(slit.center) && std::isfinite(slit.half_width) &&
        slit.half_width >= 0.0)) {
    throw std::invalid_argument("slit_operation: bad aperture geometry");
  }
  if (!(std::isfinite(slit.barrier_height) && slit.barrier_height > 0.0)) {
    throw std::invalid_argument("slit_operation: barrier_height must be positive");
  }
  if (!(std::isfinite(slit.edge_smoothing) && slit.edge_smoothing > 0.0)) {
    throw std::invalid_argument("slit_operation: edge_smoothing must be positive");
  }
  Potential pot;
  pot.profile = [slit](double y, double) { return slit_height_at(slit, y); };
  pot.time_dependent = false;
  return pot;
}

Schedule make_schedule_slit(
    const GridSpec& grid,
    const std::vector<std::pair<double, double>>& widths_and_durations,
    double barrier_height, double edge_smoothing) {
  if (grid.num_points == 0) {
    throw std::invalid_argument("make_schedule_slit: grid is empty");
  }
  if (widths_and_durations.empty()) {
    throw std::invalid_argument("make_schedule_slit: no windows given");
  }
  Schedule schedule;
  for (const auto& [half_width, duration] : widths_and_durations) {
    if (!(std::isfinite(duration) && duration > 0.0)) {
      throw std::invalid_argument("make_schedule_slit: durations must be positive");
    }
    SlitScreen slit;
    slit.center = 0.0;
    slit.half_width = half_width;
    slit.barrier_height = barrier_height;
    slit.edge_smoothing = edge_smoothing;
    schedule.entries.push_back({slit_operation(slit), duration});
  }
  return schedule;
}

std::vector<cx> seeded_random_unitary(std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw std::invalid_argument("seeded_random_unitary: dimension must be positive");
  }
  std::mt19937_64 eng(seed);
  std::vector<cx> m(n * n);
  for (auto& z : m) z = gaussian_pair(eng);

  // Modified Gram-Schmidt over columns, run twice: the second pass clears
  // the O(eps kappa) residue of the first, leaving a Gram defect near eps.
  for (std::size_t c = 0; c < n; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r < c; ++r) {
        cx proj(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          proj += std::conj(m[i * n + r]) * m[i * n + c];
        }
        for (std::size_t i = 0; i < n; ++i) {
          m[i * n + c] -= proj * m[i * n + r];
        }
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(m[i * n + c]);
    nrm = std::sqrt(nrm);
    if (!(nrm > 1e-8)) {
      throw std::runtime_error("seeded_random_unitary: degenerate draw");
    }
    const double inv = 1.0 / nrm;
    for (std::size_t i = 0; i < n; ++i) m[i * n + c] *= inv;
  }
  return m;
}

// Defaults are anchored to a reference wavenumber of one fifth of the grid
// Nyquist: the barrier sits at twice the reference kinetic energy, so the
// band reflects instead of merely picking up phase, and the window lasts one
// box traversal at the reference speed, long enough for the beam to actually
// scatter off the slit structure. Scattering then transfers momenta of order
// sqrt(2 m V0)/hbar ~ nyquist/3, safely inside the resolvable band.
double default_barrier_height(const GridSpec& grid, double mass1, double hbar) {
  const double k_ref = grid.nyquist() / 5.0;
  return 2.0 * hbar * hbar * k_ref * k_ref / (2.0 * mass1);
}

double default_edge_smoothing(const GridSpec& grid) {
  return 4.0 * grid.node_spacing;
}

double default_slit_duration(const GridSpec& grid, double mass1, double hbar) {
  const double k_ref = grid.nyquist() / 5.0;
  return 2.0 * grid.half_width * mass1 / (hbar * k_ref);
}

}  // namespace nosignal
