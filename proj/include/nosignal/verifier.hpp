#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nosignal/collapse.hpp"
#include "nosignal/dynamics.hpp"
#include "nosignal/marginals.hpp"

namespace nosignal {

// Source recipe: Gaussian band weights, optional seeded phase scrambling.
struct SourceSpec {
  // Narrow envelope inside a generous band cap: few enough incoherent
  // momentum components that slit diffraction stays visible in the particle-1
  // density instead of washing out across the band.
  double sigma_k = 0.5;
  double band_limit = 8.0;
  std::optional<std::uint64_t> phase_seed;
};

// Particle-1 readout region |y1 - center| <= half_width.
struct ApertureSpec {
  double center = 0.0;
  double half_width = 0.0;
};

struct FreeWindow {
  double duration = 0.0;
};

// Slit window; non-positive barrier_height, edge_smoothing, or duration pick
// the grid defaults from the dynamics module.
struct SlitWindow {
  SlitScreen slit;
  double duration = 0.0;
  int steps = 64;
};

struct ScheduleWindow {
  std::vector<std::pair<double, double>> widths;  // (half_width, duration)
  double barrier_height = 0.0;                    // <= 0 picks the default
  double edge_smoothing = 0.0;                    // <= 0 picks the default
  int steps = 64;
};

// Instantaneous seeded random unitary on the particle-1 axis.
struct UnitaryKick {
  std::uint64_t seed = 0;
};

using OperationSpec = std::variant<FreeWindow, SlitWindow, ScheduleWindow, UnitaryKick>;

// Declarative experiment: source, pre-flight, one particle-1 operation,
// post-flight, optional particle-1 aperture readout. Fully deterministic
// given its fields.
struct Scenario {
  std::string name = "scenario";
  double box_half_width = 10.0;
  std::size_t grid_points = 256;
  SourceSpec source;
  double mass1 = 1.0;
  double mass2 = 1.0;
  double hbar = 1.0;
  double pre_flight = 0.1;
  double post_flight = 0.6;
  OperationSpec operation = FreeWindow{};
  std::optional<ApertureSpec> aperture;
};

GridSpec scenario_grid(const Scenario& s);
std::vector<std::size_t> aperture_nodes(const GridSpec& grid, const ApertureSpec& ap);

// Slit parameters with scenario defaults resolved.
SlitWindow resolved_slit(const Scenario& s, const SlitWindow& window);

struct ScenarioResult {
  BipartiteWave state;                  // final state, before any readout
  WavenumberDistribution distribution;  // outcome-averaged when an aperture is set
};

ScenarioResult run_scenario(const Scenario& s);

struct ComparisonRecord {
  std::string baseline;
  std::string variant;
  DistributionDistance distance;
  double tolerance = 1e-12;
  bool pass() const { return distance.max_abs <= tolerance; }
};

// Distance between the two scenario distributions; the scenarios must share
// grid, source, masses, and hbar, or the comparison is meaningless.
ComparisonRecord compare(const Scenario& baseline, const Scenario& variant,
                         double tolerance);

// p * D(k2 | inside) + (1 - p) * D(k2 | outside); an empty branch simply
// drops out of the average.
WavenumberDistribution averaged_post_measurement(const Scenario& s);

struct ConditionalResult {
  double probability = 0.0;
  WavenumberDistribution distribution;
};

// The inside-aperture branch alone.
ConditionalResult conditional_distribution(const Scenario& s);

struct BandwidthRecord {
  double outside_mass = 0.0;
  double band_limit = 0.0;
  double tolerance = 0.0;
  bool pass() const { return outside_mass <= tolerance; }
};

BandwidthRecord bandwidth_check(const WavenumberDistribution& dist,
                                double band_limit, double tolerance);

// One sweep row. Comparison columns are empty in a single-width sweep;
// otherwise conditional_tv is measured against the widest slit's conditional
// distribution (0 for the widest row itself).
struct SweepRow {
  double half_width = 0.0;
  std::optional<double> marginal_max_abs;
  std::optional<double> marginal_tv;
  std::optional<double> conditional_tv;
};

std::vector<SweepRow> slit_width_sweep(const Scenario& base,
                                       const std::vector<double>& half_widths);

// One verdict line: pass iff metric <= bound (require_below) or
// metric > bound (otherwise). Verdicts are always recomputed from the
// stored numbers, never cached.
struct CheckRecord {
  std::string name;
  std::string detail;
  double metric = 0.0;
  double bound = 0.0;
  bool require_below = true;
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> extras;

  bool pass() const { return require_below ? metric <= bound : metric > bound; }
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  double box_half_width = 10.0;
  std::size_t grid_points = 256;          // scenario checks
  std::size_t unitary_grid_points = 128;  // random-unitary and factorization checks
  double no_signal_tolerance = 1e-12;
  double discrete_tolerance = 1e-14;
  double bandwidth_tolerance = 1e-10;
  double factorization_tolerance = 1e-8;
  double contrast_threshold = 0.01;
  double reshaping_threshold = 0.1;
  // Test hook: when positive, a particle-1 operation inflating the norm by
  // this factor is smuggled past the unitarity gate; the resulting check
  // must fail, proving failures are reachable.
  double injected_defect = 0.0;
};

struct NoSignalReport {
  std::vector<CheckRecord> checks;
  int threads = 1;

  bool pass() const;
};

// The default no-signaling suite: free-evolution invariance, 50 random
// unitaries, slit windows at three widths plus a wide/narrow schedule and
// two extra step counts, discrete and continuous measurement-order
// independence, bandwidth preservation, the Parseval chain, Monte Carlo
// concordance, negative controls, and the spectral column factorization.
NoSignalReport default_suite(const SuiteOptions& options = {});

}  // namespace nosignal
