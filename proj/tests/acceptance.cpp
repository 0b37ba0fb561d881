// Acceptance gate: one verdict line per criterion, each backed by doctest
// assertions with the tolerances pinned here in code. The underlying
// measurement suite runs once and is shared by every case.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "nosignal/verifier.hpp"

using namespace nosignal;

namespace {

const NoSignalReport& suite() {
  static const NoSignalReport report = default_suite();
  return report;
}

const CheckRecord* find_check(const std::string& name) {
  for (const auto& c : suite().checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double extra_value(const CheckRecord& c, const std::string& key) {
  for (const auto& [name, value] : c.extras) {
    if (name == key) return value;
  }
  return std::nan("");
}

void verdict_line(int index, bool ok, const char* text) {
  std::printf("[criterion %2d] %s  %s\n", index, ok ? "PASS" : "FAIL", text);
  std::fflush(stdout);
}

// ---- independent small-grid oracle for the readout-averaging criterion ----
//
// Everything below recomputes the readout physics with explicit projectors
// and a direct staged plane-wave sum, bypassing the library's transform and
// projection code entirely.

// Phi(k_i, k_j) = dy^2 / (2 pi) * sum_{n,m} psi(y_n, y_m) e^{-i k_i y_n}
// e^{-i k_j y_m}, evaluated as two staged direct sums.
std::vector<cx> oracle_spectrum(const BipartiteWave& st) {
  const GridSpec& g = st.grid;
  const std::size_t n = g.num_points;
  std::vector<cx> table(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      table[j * n + m] =
          std::polar(1.0, -g.wavenumber_node(j) * g.position_node(m));
    }
  }
  std::vector<cx> half(n * n, cx(0.0, 0.0));  // half[n1, kj]
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t j = 0; j < n; ++j) {
      cx acc(0.0, 0.0);
      for (std::size_t m = 0; m < n; ++m) {
        acc += st.amplitudes[row * n + m] * table[j * n + m];
      }
      half[row * n + j] = acc;
    }
  }
  const double scale = g.node_spacing * g.node_spacing /
                       (2.0 * std::acos(-1.0));
  std::vector<cx> spec(n * n, cx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cx acc(0.0, 0.0);
      for (std::size_t row = 0; row < n; ++row) {
        acc += half[row * n + j] * table[i * n + row];
      }
      spec[i * n + j] = scale * acc;
    }
  }
  return spec;
}

std::vector<double> oracle_distribution(const BipartiteWave& st) {
  const std::size_t n = st.grid.num_points;
  const std::vector<cx> spec = oracle_spectrum(st);
  std::vector<double> d(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(spec[i * n + j]);
    d[j] = acc * st.grid.wavenumber_spacing;
  }
  return d;
}

struct OracleBranch {
  double probability = 0.0;
  std::vector<double> distribution;
};

// Explicit diagonal projector on the particle-1 axis: rows outside the kept
// window are zeroed by hand, the captured weight integrated by hand, and the
// survivor rescaled by hand.
OracleBranch oracle_branch(const BipartiteWave& st, double center,
                           double half_width, bool keep_inside) {
  const GridSpec& g = st.grid;
  const std::size_t n = g.num_points;
  BipartiteWave cut = st;
  double captured = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool inside = std::abs(g.position_node(i) - center) <= half_width;
    for (std::size_t j = 0; j < n; ++j) {
      if (inside == keep_inside) {
        captured += std::norm(cut.amplitudes[i * n + j]);
      } else {
        cut.amplitudes[i * n + j] = cx(0.0, 0.0);
      }
    }
  }
  captured *= g.node_spacing * g.node_spacing;
  const double rescale = 1.0 / std::sqrt(captured);
  for (auto& z : cut.amplitudes) z *= rescale;
  return OracleBranch{captured, oracle_distribution(cut)};
}

double oracle_max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, std::abs(a[j] - b[j]));
  }
  return worst;
}

double oracle_tv(const std::vector<double>& a, const std::vector<double>& b,
                 double dk) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a[j] - b[j]);
  return 0.5 * sum * dk;
}

}  // namespace

TEST_SUITE("acceptance") {

TEST_CASE("criterion 1: free flight leaves the remote distribution fixed") {
  const CheckRecord* c = find_check("free-evolution-invariance");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-12 && c->seconds < 1.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "free flights move D(k2) by %.3g (tol 1e-12) in %.2f s (< 1 s)",
                c->metric, c->seconds);
  verdict_line(1, ok, text);
  CHECK(c->bound == 1e-12);
  CHECK(c->pass());
  CHECK(c->seconds < 1.0);
}

TEST_CASE("criterion 2: fifty random local unitaries cannot signal") {
  const CheckRecord* c = find_check("local-unitary-no-signaling");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-12 && c->seconds < 30.0 &&
                  extra_value(*c, "unitary-count") == 50.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "50 seeded unitaries move D(k2) by %.3g (tol 1e-12) in %.1f s (< 30 s)",
                c->metric, c->seconds);
  verdict_line(2, ok, text);
  CHECK(extra_value(*c, "unitary-count") == 50.0);
  CHECK(c->bound == 1e-12);
  CHECK(c->pass());
  CHECK(c->seconds < 30.0);
}

TEST_CASE("criterion 3: slit windows reshape the beam but not the far side") {
  const CheckRecord* flat = find_check("slit-no-signaling");
  const CheckRecord* shape = find_check("slit-reshapes-beam");
  REQUIRE(flat != nullptr);
  REQUIRE(shape != nullptr);
  const double seconds = flat->seconds + shape->seconds;
  const bool ok = flat->pass() && flat->bound == 1e-12 && shape->pass() &&
                  shape->bound == 0.1 && !shape->require_below &&
                  seconds < 60.0;
  char text[224];
  std::snprintf(text, sizeof text,
                "slit widths/steps/schedule move D(k2) by %.3g (tol 1e-12) while the "
                "beam shifts TV %.3f (> 0.1), %.1f s (< 60 s)",
                flat->metric, shape->metric, seconds);
  verdict_line(3, ok, text);
  CHECK(flat->bound == 1e-12);
  CHECK(flat->pass());
  // Step-count robustness and the moving schedule are folded into the same
  // worst-case metric; make sure those runs were actually present.
  CHECK(std::isfinite(extra_value(*flat, "maxabs-wide-48steps")));
  CHECK(std::isfinite(extra_value(*flat, "maxabs-wide-96steps")));
  CHECK(std::isfinite(extra_value(*flat, "maxabs-schedule")));
  CHECK(shape->bound == 0.1);
  CHECK(shape->pass());
  CHECK(seconds < 60.0);
}

TEST_CASE("criterion 4: discrete readout order never matters") {
  const CheckRecord* c = find_check("discrete-order-independence");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-14 && c->seconds < 5.0 &&
                  extra_value(*c, "state-count") == 1000.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "1000 random finite states recompose to %.3g (tol 1e-14) in %.2f s (< 5 s)",
                c->metric, c->seconds);
  verdict_line(4, ok, text);
  CHECK(extra_value(*c, "state-count") == 1000.0);
  CHECK(c->bound == 1e-14);
  CHECK(c->pass());
  CHECK(c->seconds < 5.0);
}

TEST_CASE("criterion 5: readout averaging is invisible, conditioning is not") {
  const CheckRecord* avg = find_check("measurement-average-invariance");
  const CheckRecord* contrast = find_check("conditional-contrast");
  REQUIRE(avg != nullptr);
  REQUIRE(contrast != nullptr);

  // Independent small-grid oracle: explicit projectors and direct staged
  // plane-wave sums, no shared transform code. It re-establishes both halves
  // of the claim before the large-grid numbers are trusted.
  Scenario probe;
  probe.grid_points = 64;
  probe.source.phase_seed = 5;
  const double dy = scenario_grid(probe).node_spacing;
  probe.operation = SlitWindow{SlitScreen{0.0, 4.0 * dy, 0.0, 0.0}, 0.0, 64};
  const BipartiteWave state = run_scenario(probe).state;
  const double dk = state.grid.wavenumber_spacing;

  const std::vector<double> d_unc = oracle_distribution(state);
  const OracleBranch in = oracle_branch(state, 0.0, 4.0 * dy, true);
  const OracleBranch out = oracle_branch(state, 0.0, 4.0 * dy, false);
  std::vector<double> averaged(d_unc.size(), 0.0);
  for (std::size_t j = 0; j < averaged.size(); ++j) {
    averaged[j] =
        in.probability * in.distribution[j] + out.probability * out.distribution[j];
  }
  const double oracle_avg_dev = oracle_max_abs(averaged, d_unc);
  const double oracle_contrast = oracle_tv(in.distribution, d_unc, dk);
  const double oracle_weights = std::abs(in.probability + out.probability - 1.0);

  // The library must agree with the oracle on the conditional branch.
  Scenario with_readout = probe;
  with_readout.aperture = ApertureSpec{0.0, 4.0 * dy};
  const ConditionalResult lib = conditional_distribution(with_readout);
  const double lib_vs_oracle =
      oracle_max_abs(lib.distribution.values(), in.distribution);

  const bool ok = avg->pass() && avg->bound == 1e-12 && contrast->pass() &&
                  contrast->bound == 0.01 && !contrast->require_below &&
                  avg->seconds < 30.0 && oracle_avg_dev <= 1e-12 &&
                  oracle_contrast > 0.01 && oracle_weights <= 1e-12 &&
                  lib_vs_oracle <= 1e-9;
  char text[256];
  std::snprintf(text, sizeof text,
                "outcome average moves D(k2) by %.3g (tol 1e-12); conditional TV %.3f "
                "(> 0.01); oracle: avg %.3g, TV %.3f, lib match %.3g; %.1f s (< 30 s)",
                avg->metric, contrast->metric, oracle_avg_dev, oracle_contrast,
                lib_vs_oracle, avg->seconds);
  verdict_line(5, ok, text);
  CHECK(avg->bound == 1e-12);
  CHECK(avg->pass());
  CHECK(contrast->bound == 0.01);
  CHECK(contrast->pass());
  CHECK(avg->seconds < 30.0);
  CHECK(oracle_weights <= 1e-12);
  CHECK(oracle_avg_dev <= 1e-12);
  CHECK(oracle_contrast > 0.01);
  CHECK(lib_vs_oracle <= 1e-9);
}

TEST_CASE("criterion 6: the distribution keeps its band after the slit") {
  const CheckRecord* c = find_check("bandwidth-preservation");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-10 && c->seconds < 10.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "mass outside the source band after the narrowest slit: %.3g "
                "(tol 1e-10), %.2f s (< 10 s)",
                c->metric, c->seconds);
  verdict_line(6, ok, text);
  CHECK(c->bound == 1e-10);
  CHECK(c->pass());
  CHECK(c->seconds < 10.0);
}

TEST_CASE("criterion 7: normalization survives every pipeline stage") {
  const CheckRecord* c = find_check("parseval-chain");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-12;
  char text[192];
  std::snprintf(text, sizeof text,
                "worst |1 - total| across all stages and branches: %.3g (tol 1e-12)",
                c->metric);
  verdict_line(7, ok, text);
  CHECK(c->bound == 1e-12);
  CHECK(c->pass());
}

TEST_CASE("criterion 8: sampled pairs match the marginal and repeat exactly") {
  const CheckRecord* z = find_check("sampling-concordance");
  const CheckRecord* rep = find_check("sampling-determinism");
  REQUIRE(z != nullptr);
  REQUIRE(rep != nullptr);
  const bool ok = z->pass() && z->bound == 4.0 && rep->pass() &&
                  rep->metric == 0.0 &&
                  extra_value(*z, "pairs-per-state") == 100000.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "worst marginal-cell deviation %.2f binomial sigma (< 4); repeated "
                "fixed-seed draw differs by %.0f counts",
                z->metric, rep->metric);
  verdict_line(8, ok, text);
  CHECK(extra_value(*z, "pairs-per-state") == 100000.0);
  CHECK(z->bound == 4.0);
  CHECK(z->pass());
  CHECK(rep->metric == 0.0);
  CHECK(rep->pass());
}

TEST_CASE("criterion 9: defects are caught, not absorbed") {
  const CheckRecord* gate = find_check("rejects-nonunitary");
  const CheckRecord* probe = find_check("detects-source-change");
  REQUIRE(gate != nullptr);
  REQUIRE(probe != nullptr);
  // gate->metric is the Gram defect reported by the thrown rejection; it is
  // zero when the operation was wrongly accepted.
  const bool ok = gate->pass() && gate->metric > 1e-3 && probe->pass() &&
                  probe->bound == 1e-3 && !probe->require_below &&
                  extra_value(*probe, "meets-no-signal-tolerance") == 0.0;
  char text[224];
  std::snprintf(text, sizeof text,
                "norm-inflating operation rejected with defect %.3g; modified source "
                "shifts D(k2) by %.3f and fails the invariance verdict",
                gate->metric, probe->metric);
  verdict_line(9, ok, text);
  CHECK(gate->pass());
  CHECK(gate->metric > 1e-3);
  CHECK(probe->bound == 1e-3);
  CHECK(probe->pass());
  CHECK(extra_value(*probe, "meets-no-signal-tolerance") == 0.0);
}

TEST_CASE("criterion 10: one slit, two sources, identical spectral columns") {
  const CheckRecord* c = find_check("factorization-columns");
  REQUIRE(c != nullptr);
  const bool ok = c->pass() && c->bound == 1e-8 &&
                  extra_value(*c, "shared-columns") >= 1.0;
  char text[192];
  std::snprintf(text, sizeof text,
                "normalized columns differ by %.3g (tol 1e-8) across %.0f shared columns",
                c->metric, extra_value(*c, "shared-columns"));
  verdict_line(10, ok, text);
  CHECK(c->bound == 1e-8);
  CHECK(extra_value(*c, "shared-columns") >= 1.0);
  CHECK(c->pass());
}

TEST_CASE("acceptance summary") {
  const bool ok = suite().pass();
  std::printf("[acceptance] overall %s (%zu checks, %d thread%s)\n",
              ok ? "PASS" : "FAIL", suite().checks.size(), suite().threads,
              suite().threads == 1 ? "" : "s");
  std::fflush(stdout);
  CHECK(ok);
}

}  // TEST_SUITE
