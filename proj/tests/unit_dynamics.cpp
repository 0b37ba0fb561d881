#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nosignal/dynamics.hpp"
#include "nosignal/kernels.hpp"
#include "nosignal/marginals.hpp"

using namespace nosignal;

namespace {

BipartiteWave test_state(std::size_t n, double sigma, double cut,
                         std::uint64_t seed, double m1 = 1.0, double m2 = 1.0) {
  const GridSpec g = make_grid(10.0, n);
  return build_epr_state(randomize_phase(gaussian_band(g, sigma, cut), seed),
                         m1, m2, 1.0);
}

double max_amp_diff(const BipartiteWave& a, const BipartiteWave& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    worst = std::max(worst, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("zero flight time returns the state bit for bit") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 1);
  const BipartiteWave out = free_propagate(s, 0.0);
  CHECK(out.amplitudes == s.amplitudes);
}

TEST_CASE("negative or non-finite flight times are rejected") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 1);
  CHECK_THROWS_AS((void)free_propagate(s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(
      (void)free_propagate(s, std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
}

TEST_CASE("a single opposite-momentum pair only gains a global phase") {
  const GridSpec g = make_grid(10.0, 32);
  std::vector<cx> v(32, cx(0.0, 0.0));
  const std::size_t node = 20;
  v[node] = cx(1.0 / std::sqrt(g.wavenumber_spacing), 0.0);
  const SpectralAmplitude w(g, v, 5.0);
  const double m1 = 1.0, m2 = 2.5, t = 0.7;
  const BipartiteWave s = build_epr_state(w, m1, m2, 1.0);
  const BipartiteWave out = free_propagate(s, t);

  const double k = g.wavenumber_node(node);
  const double omega = k * k / (2.0 * m1) + k * k / (2.0 * m2);
  const cx phase = std::polar(1.0, -omega * t);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    worst = std::max(worst, std::abs(out.amplitudes[i] - phase * s.amplitudes[i]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("drift writes the two-mass dispersion phase on every pair component") {
  const double m1 = 1.0, m2 = 2.5, t = 0.31;
  const BipartiteWave s = test_state(32, 1.0, 3.0, 4, m1, m2);
  const BipartiteWave out = free_propagate(s, t);
  const auto before = spectral_components(s);
  const auto after = spectral_components(out);
  const GridSpec& g = s.grid;
  const std::size_t n = g.num_points;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(before[i * n + j]) < 1e-10) continue;
      const double omega =
          g.wavenumber_node(i) * g.wavenumber_node(i) / (2.0 * m1) +
          g.wavenumber_node(j) * g.wavenumber_node(j) / (2.0 * m2);
      const cx expected = std::polar(1.0, -omega * t) * before[i * n + j];
      worst = std::max(worst, std::abs(after[i * n + j] - expected));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("stepped free evolution agrees with the exact drift") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 2);
  const BipartiteWave exact = free_propagate(s, 0.48);
  const BipartiteWave stepped = split_step(s, FreeOnly{}, 0.48, 12);
  CHECK(max_amp_diff(exact, stepped) < 1e-12);
}

TEST_CASE("identity operator leaves the state unchanged") {
  const BipartiteWave s = test_state(24, 1.0, 3.0, 3);
  const std::size_t n = 24;
  std::vector<cx> eye(n * n, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = cx(1.0, 0.0);
  const BipartiteWave out = apply_local_unitary(s, eye);
  CHECK(out.amplitudes == s.amplitudes);
}

TEST_CASE("diagonal phase operators preserve moduli and the remote spectrum") {
  const BipartiteWave s = test_state(24, 1.0, 3.0, 6);
  const std::size_t n = 24;
  std::mt19937_64 eng(55);
  std::vector<cx> u(n * n, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    u[i * n + i] = std::polar(1.0, 6.283185307179586 * uniform_unit(eng));
  }
  const BipartiteWave out = apply_local_unitary(s, u);
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    CHECK(std::abs(std::abs(out.amplitudes[i]) - std::abs(s.amplitudes[i])) <
          1e-14);
  }
  const auto d0 = particle2_distribution(s);
  const auto d1 = particle2_distribution(out);
  CHECK(distribution_distance(d1, d0).max_abs < 1e-13);
}

TEST_CASE("norm-inflating operators are refused with their defect attached") {
  const BipartiteWave s = test_state(24, 1.0, 3.0, 7);
  const std::size_t n = 24;
  std::vector<cx> bad(n * n, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) bad[i * n + i] = cx(1.0 + 1e-3, 0.0);
  CHECK_THROWS_AS((void)apply_local_unitary(s, bad), NonUnitaryError);
  try {
    (void)apply_local_unitary(s, bad);
  } catch (const NonUnitaryError& e) {
    CHECK(e.defect() == doctest::Approx(2.001e-3).epsilon(1e-6));
  }
  CHECK_THROWS_AS((void)apply_local_unitary(s, std::vector<cx>(n * n - 1)),
                  std::invalid_argument);
}

TEST_CASE("random particle-1 potentials never move the remote spectrum") {
  const BipartiteWave s = test_state(64, 0.8, 3.0, 8);
  const auto d0 = particle2_distribution(s);
  std::mt19937_64 eng(321);
  for (int trial = 0; trial < 50; ++trial) {
    // Random low-order trigonometric potential, bounded slope by construction.
    const double a1 = 4.0 * (uniform_unit(eng) - 0.5);
    const double a2 = 4.0 * (uniform_unit(eng) - 0.5);
    const double a3 = 4.0 * (uniform_unit(eng) - 0.5);
    Potential pot;
    pot.profile = [a1, a2, a3](double y, double) {
      const double u = std::numbers::pi * y / 10.0;
      return a1 * std::cos(u) + a2 * std::sin(2.0 * u) + a3 * std::cos(3.0 * u);
    };
    pot.time_dependent = false;
    const BipartiteWave out = split_step(s, pot, 0.2, 16);
    CHECK(distribution_distance(particle2_distribution(out), d0).max_abs <
          1e-12);
  }
}

TEST_CASE("midpoint sampling of a static profile matches the cached path bitwise") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 9);
  Potential cached;
  cached.profile = [](double y, double) { return 0.4 * y * y; };
  cached.time_dependent = false;
  Potential sampled;
  sampled.profile = cached.profile;
  sampled.time_dependent = true;  // same values, recomputed at midpoints
  const BipartiteWave a = split_step(s, cached, 0.3, 8);
  const BipartiteWave b = split_step(s, sampled, 0.3, 8);
  CHECK(a.amplitudes == b.amplitudes);
}

TEST_CASE("two equal windows compose to one window of twice the length") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 10);
  SlitScreen slit;
  slit.half_width = 4.0 * s.grid.node_spacing;
  slit.barrier_height = 16.0;
  slit.edge_smoothing = default_edge_smoothing(s.grid);
  const Potential pot = slit_operation(slit);
  const BipartiteWave half = split_step(s, pot, 0.4, 16);
  const BipartiteWave twice = split_step(half, pot, 0.4, 16);
  const BipartiteWave whole = split_step(s, pot, 0.8, 32);
  CHECK(twice.amplitudes == whole.amplitudes);
}

TEST_CASE("schedules validate their durations") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 11);
  Potential pot;
  pot.profile = [](double, double) { return 1.0; };

  Schedule bad_sum;
  bad_sum.entries.push_back({pot, 0.2});
  CHECK_THROWS_AS((void)split_step(s, bad_sum, 0.3, 8), std::invalid_argument);

  Schedule zero_entry;
  zero_entry.entries.push_back({pot, 0.0});
  CHECK_THROWS_AS((void)split_step(s, zero_entry, 0.0, 8),
                  std::invalid_argument);

  ExplicitUnitary timed_unitary;
  timed_unitary.matrix = seeded_random_unitary(32, 1);
  Schedule bad_unitary;
  bad_unitary.entries.push_back({timed_unitary, 0.1});
  CHECK_THROWS_AS((void)split_step(s, bad_unitary, 0.1, 8),
                  std::invalid_argument);

  CHECK_THROWS_AS((void)split_step(s, ExplicitUnitary{timed_unitary.matrix},
                                   0.1, 8),
                  std::invalid_argument);
}

TEST_CASE("a schedule splits one window into bitwise-equal consecutive halves") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 12);
  SlitScreen slit;
  slit.half_width = 4.0 * s.grid.node_spacing;
  slit.barrier_height = 16.0;
  slit.edge_smoothing = default_edge_smoothing(s.grid);
  const Potential pot = slit_operation(slit);

  Schedule two_halves;
  two_halves.entries.push_back({pot, 0.2});
  two_halves.entries.push_back({pot, 0.2});
  const BipartiteWave a = split_step(s, two_halves, 0.4, 64);
  const BipartiteWave b = split_step(s, pot, 0.4, 64);
  CHECK(a.amplitudes == b.amplitudes);
}

TEST_CASE("an instantaneous unitary entry fires between timed windows") {
  const BipartiteWave s = test_state(32, 1.0, 3.0, 13);
  ExplicitUnitary kick;
  kick.matrix = seeded_random_unitary(32, 77);

  Schedule sch;
  sch.entries.push_back({FreeOnly{}, 0.2});
  sch.entries.push_back({kick, 0.0});
  const BipartiteWave a = split_step(s, sch, 0.2, 8);
  const BipartiteWave b =
      apply_local_unitary(split_step(s, FreeOnly{}, 0.2, 8), kick.matrix);
  CHECK(max_amp_diff(a, b) == 0.0);
}

TEST_CASE("a tall smoothed wall transmits less than a thousandth of a packet") {
  // Localized packet, mean wavenumber 3, against a half-space barrier of
  // height 50: kinetic energy 4.5 against a wall ten times higher.
  const GridSpec g = make_grid(10.0, 128);
  const std::size_t n = g.num_points;
  BipartiteWave s;
  s.grid = g;
  s.amplitudes.assign(n * n, cx(0.0, 0.0));
  const double y0 = -4.0, sig = 0.8, kbar = 3.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y1 = g.position_node(i);
    const cx packet = std::polar(
        std::exp(-(y1 - y0) * (y1 - y0) / (4.0 * sig * sig)), kbar * y1);
    for (std::size_t j = 0; j < n; ++j) {
      const double y2 = g.position_node(j);
      s.amplitudes[i * n + j] = packet * std::exp(-y2 * y2 / 8.0);
    }
  }
  const double raw = weighted_norm_sq(s);
  kernels::scale(s.amplitudes.data(), s.amplitudes.size(), 1.0 / std::sqrt(raw));

  const double v0 = 50.0, edge = 0.5;
  Potential wall;
  wall.profile = [v0, edge](double y, double) {
    if (y <= 0.0) return 0.0;
    if (y >= edge) return v0;
    return 0.5 * v0 * (1.0 - std::cos(std::numbers::pi * y / edge));
  };
  wall.time_dependent = false;
  // Long enough for the packet to reach the wall and bounce: 2.5 time units
  // at group speed 3 covers the 4-unit approach plus the return leg.
  const BipartiteWave out = split_step(s, wall, 2.5, 256);

  const auto rho1 = position_marginal(out, 1);
  double beyond = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.position_node(i) > edge + 1.0) beyond += rho1[i] * g.node_spacing;
  }
  CHECK(weighted_norm_sq(out) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beyond < 1e-3);
}

TEST_CASE("slit geometry and schedule construction validate their inputs") {
  SlitScreen bad;
  bad.half_width = -1.0;
  bad.barrier_height = 1.0;
  bad.edge_smoothing = 0.1;
  CHECK_THROWS_AS((void)slit_operation(bad), std::invalid_argument);
  bad.half_width = 1.0;
  bad.barrier_height = 0.0;
  CHECK_THROWS_AS((void)slit_operation(bad), std::invalid_argument);
  bad.barrier_height = 1.0;
  bad.edge_smoothing = 0.0;
  CHECK_THROWS_AS((void)slit_operation(bad), std::invalid_argument);

  const GridSpec g = make_grid(10.0, 32);
  CHECK_THROWS_AS((void)make_schedule_slit(g, {}, 1.0, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_schedule_slit(g, {{1.0, -0.2}}, 1.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("seeded unitaries are unitary, reproducible, and seed-sensitive") {
  const auto a = seeded_random_unitary(48, 5);
  const auto b = seeded_random_unitary(48, 5);
  const auto c = seeded_random_unitary(48, 6);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(kernels::unitarity_defect(a.data(), 48) < 1e-12);
  CHECK_THROWS_AS((void)seeded_random_unitary(0, 1), std::invalid_argument);
}

TEST_CASE("slit profile: open aperture, smooth rise, full barrier") {
  SlitScreen slit;
  slit.center = 0.5;
  slit.half_width = 1.0;
  slit.barrier_height = 10.0;
  slit.edge_smoothing = 0.25;
  CHECK(slit_height_at(slit, 0.5) == 0.0);
  CHECK(slit_height_at(slit, 1.5) == 0.0);    // aperture edge still open
  CHECK(slit_height_at(slit, -0.5) == 0.0);
  CHECK(slit_height_at(slit, 1.75) == 10.0);  // past the smoothing band
  CHECK(slit_height_at(slit, -0.75) == 10.0);
  const double mid = slit_height_at(slit, 1.625);
  CHECK(mid == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(slit_height_at(slit, 1.55) > 0.0);
  CHECK(slit_height_at(slit, 1.55) < 5.0);
}

}  // TEST_SUITE
