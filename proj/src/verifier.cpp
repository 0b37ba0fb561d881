#include "nosignal/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nosignal/kernels.hpp"

namespace nosignal {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SpectralAmplitude scenario_source(const Scenario& s, const GridSpec& grid) {
  SpectralAmplitude w = gaussian_band(grid, s.source.sigma_k, s.source.band_limit);
  if (s.source.phase_seed) w = randomize_phase(w, *s.source.phase_seed);
  return w;
}

BipartiteWave apply_operation(BipartiteWave state, const Scenario& s) {
  const GridSpec& grid = state.grid;
  if (const auto* f = std::get_if<FreeWindow>(&s.operation)) {
    if (!(std::isfinite(f->duration) && f->duration >= 0.0)) {
      throw std::invalid_argument("run_scenario: bad free-window duration");
    }
    return f->duration > 0.0 ? free_propagate(state, f->duration) : state;
  }
  if (const auto* w = std::get_if<SlitWindow>(&s.operation)) {
    const SlitWindow r = resolved_slit(s, *w);
    return split_step(state, slit_operation(r.slit), r.duration, r.steps);
  }
  if (const auto* sch = std::get_if<ScheduleWindow>(&s.operation)) {
    const double height = sch->barrier_height > 0.0
                              ? sch->barrier_height
                              : default_barrier_height(grid, s.mass1, s.hbar);
    const double smoothing = sch->edge_smoothing > 0.0
                                 ? sch->edge_smoothing
                                 : default_edge_smoothing(grid);
    const Schedule schedule =
        make_schedule_slit(grid, sch->widths, height, smoothing);
    double total = 0.0;
    for (const auto& [a, d] : sch->widths) total += d;
    return split_step(state, schedule, total, sch->steps);
  }
  const auto& kick = std::get<UnitaryKick>(s.operation);
  const auto u = seeded_random_unitary(grid.num_points, kick.seed);
  return apply_local_unitary(state, u);
}

// The final pre-readout state of the pipeline: build, pre-flight, particle-1
// operation, post-flight.
BipartiteWave final_state(const Scenario& s) {
  const GridSpec grid = scenario_grid(s);
  if (!(std::isfinite(s.pre_flight) && s.pre_flight >= 0.0) ||
      !(std::isfinite(s.post_flight) && s.post_flight >= 0.0)) {
    throw std::invalid_argument("run_scenario: flight times must be >= 0");
  }
  const SpectralAmplitude w = scenario_source(s, grid);
  BipartiteWave state = build_epr_state(w, s.mass1, s.mass2, s.hbar);
  if (s.pre_flight > 0.0) state = free_propagate(state, s.pre_flight);
  state = apply_operation(std::move(state), s);
  if (s.post_flight > 0.0) state = free_propagate(state, s.post_flight);
  return state;
}

// p D_in + q D_out with the weights the projectors actually captured; an
// empty branch drops out of the average.
WavenumberDistribution averaged_from_state(const BipartiteWave& state,
                                           const ApertureSpec& ap) {
  const GridSpec& grid = state.grid;
  const std::vector<std::size_t> inside = aperture_nodes(grid, ap);
  std::vector<char> is_inside(grid.num_points, 0);
  for (std::size_t node : inside) is_inside[node] = 1;
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < grid.num_points; ++i) {
    if (!is_inside[i]) outside.push_back(i);
  }

  std::vector<double> avg(grid.num_points, 0.0);
  auto accumulate_branch = [&](const std::vector<std::size_t>& nodes) {
    if (nodes.empty()) return;
    try {
      const ProjectionOutcome branch = project_aperture(state, nodes);
      const WavenumberDistribution d = particle2_distribution(branch.state);
      for (std::size_t j = 0; j < grid.num_points; ++j) {
        avg[j] += branch.probability * d.values()[j];
      }
    } catch (const ZeroProbabilityError&) {
      // empty branch: the other branch alone is the average
    }
  };
  accumulate_branch(inside);
  accumulate_branch(outside);
  return WavenumberDistribution(grid, std::move(avg));
}

double position_tv(const std::vector<double>& a, const std::vector<double>& b,
                   double dy) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum * dy;
}

}  // namespace

GridSpec scenario_grid(const Scenario& s) {
  return make_grid(s.box_half_width, s.grid_points);
}

std::vector<std::size_t> aperture_nodes(const GridSpec& grid,
                                        const ApertureSpec& ap) {
  if (!(std::isfinite(ap.center) && std::isfinite(ap.half_width) &&
        ap.half_width >= 0.0)) {
    throw std::invalid_argument("aperture_nodes: bad aperture geometry");
  }
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < grid.num_points; ++i) {
    if (std::abs(grid.position_node(i) - ap.center) <= ap.half_width) {
      nodes.push_back(i);
    }
  }
  return nodes;
}

SlitWindow resolved_slit(const Scenario& s, const SlitWindow& window) {
  const GridSpec grid = scenario_grid(s);
  SlitWindow r = window;
  if (!(r.slit.barrier_height > 0.0)) {
    r.slit.barrier_height = default_barrier_height(grid, s.mass1, s.hbar);
  }
  if (!(r.slit.edge_smoothing > 0.0)) {
    r.slit.edge_smoothing = default_edge_smoothing(grid);
  }
  if (!(r.duration > 0.0)) {
    r.duration = default_slit_duration(grid, s.mass1, s.hbar);
  }
  if (r.steps < 1) {
    throw std::invalid_argument("resolved_slit: steps must be >= 1");
  }
  return r;
}

ScenarioResult run_scenario(const Scenario& s) {
  BipartiteWave state = final_state(s);
  WavenumberDistribution dist =
      s.aperture ? averaged_from_state(state, *s.aperture)
                 : particle2_distribution(state);
  return ScenarioResult{std::move(state), std::move(dist)};
}

ComparisonRecord compare(const Scenario& baseline, const Scenario& variant,
                         double tolerance) {
  const bool same_frame =
      baseline.box_half_width == variant.box_half_width &&
      baseline.grid_points == variant.grid_points &&
      baseline.source.sigma_k == variant.source.sigma_k &&
      baseline.source.band_limit == variant.source.band_limit &&
      baseline.source.phase_seed == variant.source.phase_seed &&
      baseline.mass1 == variant.mass1 && baseline.mass2 == variant.mass2 &&
      baseline.hbar == variant.hbar;
  if (!same_frame) {
    throw std::invalid_argument("compare: scenarios differ in grid or source");
  }
  if (!(std::isfinite(tolerance) && tolerance >= 0.0)) {
    throw std::invalid_argument("compare: tolerance must be >= 0");
  }
  ComparisonRecord rec;
  rec.baseline = baseline.name;
  rec.variant = variant.name;
  rec.tolerance = tolerance;
  rec.distance = distribution_distance(run_scenario(baseline).distribution,
                                       run_scenario(variant).distribution);
  return rec;
}

WavenumberDistribution averaged_post_measurement(const Scenario& s) {
  if (!s.aperture) {
    throw std::invalid_argument("averaged_post_measurement: no aperture set");
  }
  return averaged_from_state(final_state(s), *s.aperture);
}

ConditionalResult conditional_distribution(const Scenario& s) {
  if (!s.aperture) {
    throw std::invalid_argument("conditional_distribution: no aperture set");
  }
  const BipartiteWave state = final_state(s);
  const auto nodes = aperture_nodes(state.grid, *s.aperture);
  const ProjectionOutcome branch = project_aperture(state, nodes);
  return ConditionalResult{branch.probability,
                           particle2_distribution(branch.state)};
}

BandwidthRecord bandwidth_check(const WavenumberDistribution& dist,
                                double band_limit, double tolerance) {
  if (!(band_limit > 0.0 && band_limit <= dist.grid().nyquist())) {
    throw std::invalid_argument("bandwidth_check: band limit outside the grid");
  }
  BandwidthRecord rec;
  rec.band_limit = band_limit;
  rec.tolerance = tolerance;
  rec.outside_mass = band_mass_outside(dist, band_limit);
  return rec;
}

std::vector<SweepRow> slit_width_sweep(const Scenario& base,
                                       const std::vector<double>& half_widths) {
  if (half_widths.empty()) {
    throw std::invalid_argument("slit_width_sweep: no widths given");
  }
  const auto* window = std::get_if<SlitWindow>(&base.operation);
  if (!window) {
    throw std::invalid_argument("slit_width_sweep: base scenario needs a slit window");
  }
  const SlitWindow resolved = resolved_slit(base, *window);
  const bool with_comparisons = half_widths.size() >= 2;

  Scenario baseline = base;
  baseline.name = base.name + "-free";
  baseline.operation = FreeWindow{resolved.duration};
  baseline.aperture.reset();
  const WavenumberDistribution d_free = run_scenario(baseline).distribution;

  std::vector<SweepRow> rows;
  std::vector<std::optional<WavenumberDistribution>> conditionals;
  for (double width : half_widths) {
    if (!(std::isfinite(width) && width >= 0.0)) {
      throw std::invalid_argument("slit_width_sweep: widths must be >= 0");
    }
    SweepRow row;
    row.half_width = width;

    Scenario v = base;
    v.aperture.reset();
    SlitWindow sw = resolved;
    sw.slit.half_width = width;
    v.operation = sw;
    const BipartiteWave state = final_state(v);

    if (with_comparisons) {
      const auto dist =
          distribution_distance(particle2_distribution(state), d_free);
      row.marginal_max_abs = dist.max_abs;
      row.marginal_tv = dist.total_variation;
      try {
        const auto nodes = aperture_nodes(
            state.grid, ApertureSpec{resolved.slit.center, width});
        const ProjectionOutcome branch = project_aperture(state, nodes);
        conditionals.emplace_back(particle2_distribution(branch.state));
      } catch (const std::exception&) {
        conditionals.emplace_back(std::nullopt);
      }
    } else {
      conditionals.emplace_back(std::nullopt);
    }
    rows.push_back(std::move(row));
  }

  if (with_comparisons) {
    const std::size_t widest = static_cast<std::size_t>(
        std::max_element(half_widths.begin(), half_widths.end()) -
        half_widths.begin());
    if (conditionals[widest]) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!conditionals[i]) continue;
        rows[i].conditional_tv =
            distribution_distance(*conditionals[i], *conditionals[widest])
                .total_variation;
      }
    }
  }
  return rows;
}

bool NoSignalReport::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckRecord& c) { return c.pass(); });
}

NoSignalReport default_suite(const SuiteOptions& opt) {
  NoSignalReport report;
#ifdef _OPENMP
  report.threads = omp_get_max_threads();
#endif

  Scenario base;
  base.box_half_width = opt.box_half_width;
  base.grid_points = opt.grid_points;
  base.source.phase_seed = opt.seed;

  const GridSpec grid = scenario_grid(base);
  const double dy = grid.node_spacing;
  const double slit_duration = default_slit_duration(grid, base.mass1, base.hbar);

  // --- free-evolution invariance ------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "free-evolution-invariance";
    c.detail = "worst max-abs |D(k2;t) - D(k2;0)| over free flights";
    c.bound = opt.no_signal_tolerance;
    const SpectralAmplitude w = scenario_source(base, grid);
    const BipartiteWave fresh = build_epr_state(w, base.mass1, base.mass2, base.hbar);
    const WavenumberDistribution d0 = particle2_distribution(fresh);
    const std::pair<const char*, double> times[] = {
        {"max-abs-t-short", 0.25}, {"max-abs-t-unit", 1.0}, {"max-abs-t-long", 3.7}};
    for (const auto& [label, t] : times) {
      const auto dt = particle2_distribution(free_propagate(fresh, t));
      const auto dist = distribution_distance(dt, d0);
      c.metric = std::max(c.metric, dist.max_abs);
      c.extras.emplace_back(label, dist.max_abs);
    }
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- 50 random unitaries --------------------------------------------------
  Scenario small = base;
  small.grid_points = opt.unitary_grid_points;
  const GridSpec small_grid = scenario_grid(small);
  BipartiteWave small_state =
      build_epr_state(scenario_source(small, small_grid), 1.0, 1.0, 1.0);
  WavenumberDistribution small_d0 = particle2_distribution(small_state);
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "local-unitary-no-signaling";
    c.detail = "worst max-abs deviation of D(k2) over 50 seeded random unitaries";
    c.bound = opt.no_signal_tolerance;
    double worst_tv = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto u = seeded_random_unitary(small_grid.num_points,
                                           opt.seed + 101 + static_cast<std::uint64_t>(i));
      const BipartiteWave kicked = apply_local_unitary(small_state, u);
      const auto dist =
          distribution_distance(particle2_distribution(kicked), small_d0);
      c.metric = std::max(c.metric, dist.max_abs);
      worst_tv = std::max(worst_tv, dist.total_variation);
    }
    c.extras.emplace_back("unitary-count", 50.0);
    c.extras.emplace_back("worst-tv", worst_tv);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- slit windows: no-signaling plus visible beam reshaping ---------------
  Scenario free_base = base;
  free_base.name = "free";
  free_base.operation = FreeWindow{slit_duration};
  ScenarioResult free_res = run_scenario(free_base);
  std::optional<WavenumberDistribution> narrow_d;
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "slit-no-signaling";
    c.detail =
        "worst max-abs deviation over slit widths, step counts, and a "
        "wide/narrow schedule";
    c.bound = opt.no_signal_tolerance;
    CheckRecord r;
    r.name = "slit-reshapes-beam";
    r.detail = "smallest TV distance of the particle-1 position density from free";
    r.bound = opt.reshaping_threshold;
    r.require_below = false;
    double min_reshape = std::numeric_limits<double>::infinity();

    const std::vector<double> rho_free = position_marginal(free_res.state, 1);
    struct SlitRun {
      const char* label;
      double half_width;
      int steps;
    };
    const SlitRun runs[] = {{"maxabs-wide", 8.0 * dy, 64},
                            {"maxabs-mid", 4.0 * dy, 64},
                            {"maxabs-narrow", 2.0 * dy, 64},
                            {"maxabs-wide-48steps", 8.0 * dy, 48},
                            {"maxabs-wide-96steps", 8.0 * dy, 96}};
    for (const auto& run : runs) {
      Scenario v = base;
      v.name = run.label;
      SlitWindow sw;
      sw.slit.half_width = run.half_width;
      sw.steps = run.steps;
      v.operation = sw;
      const ScenarioResult res = run_scenario(v);
      const auto dist =
          distribution_distance(res.distribution, free_res.distribution);
      c.metric = std::max(c.metric, dist.max_abs);
      c.extras.emplace_back(run.label, dist.max_abs);
      if (run.steps == 64) {
        const double tv =
            position_tv(position_marginal(res.state, 1), rho_free, dy);
        min_reshape = std::min(min_reshape, tv);
        r.extras.emplace_back(std::string("beam-tv-") + (run.half_width > 6.0 * dy
                                                             ? "wide"
                                                             : run.half_width > 3.0 * dy
                                                                   ? "mid"
                                                                   : "narrow"),
                              tv);
        if (run.half_width == 2.0 * dy) narrow_d = res.distribution;
      }
    }
    {
      Scenario v = base;
      v.name = "schedule";
      ScheduleWindow sch;
      sch.widths = {{8.0 * dy, slit_duration / 2.0}, {2.0 * dy, slit_duration / 2.0}};
      sch.steps = 64;
      v.operation = sch;
      const auto dist = distribution_distance(run_scenario(v).distribution,
                                              free_res.distribution);
      c.metric = std::max(c.metric, dist.max_abs);
      c.extras.emplace_back("maxabs-schedule", dist.max_abs);
    }
    r.metric = min_reshape;
    c.seconds = now_seconds() - t0;
    r.seconds = c.seconds;
    report.checks.push_back(std::move(c));
    report.checks.push_back(std::move(r));
  }

  // --- discrete measurement-order independence ------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "discrete-order-independence";
    c.detail =
        "worst |sum_i rho1_i rho2_{j|i} - rho2_j| over 1000 random states up to 8x8";
    c.bound = opt.discrete_tolerance;
    std::mt19937_64 eng(opt.seed + 777);
    for (int s = 0; s < 1000; ++s) {
      const std::size_t d1 = 2 + static_cast<std::size_t>(eng() % 7);
      const std::size_t d2 = 2 + static_cast<std::size_t>(eng() % 7);
      std::vector<cx> coeffs(d1 * d2);
      for (auto& z : coeffs) z = gaussian_pair(eng);
      const DiscreteBipartite state =
          DiscreteBipartite::normalized(d1, d2, std::move(coeffs));
      const std::vector<double> rho1 = alice_marginal(state);
      const std::vector<double> rho2 = bob_marginal(state);
      std::vector<double> recomposed(d2, 0.0);
      for (std::size_t i = 0; i < d1; ++i) {
        if (rho1[i] <= kZeroProbability) continue;
        const std::vector<double> cond = bob_conditional(state, i);
        for (std::size_t j = 0; j < d2; ++j) recomposed[j] += rho1[i] * cond[j];
      }
      for (std::size_t j = 0; j < d2; ++j) {
        c.metric = std::max(c.metric, std::abs(recomposed[j] - rho2[j]));
      }
    }
    c.extras.emplace_back("state-count", 1000.0);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- continuous measurement-order independence + conditional contrast -----
  std::optional<WavenumberDistribution> conditional_d;
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "measurement-average-invariance";
    c.detail = "max-abs |p D_in + q D_out - D| for an aperture readout";
    c.bound = opt.no_signal_tolerance;
    CheckRecord k;
    k.name = "conditional-contrast";
    k.detail = "TV distance between the conditional and unconditional D(k2)";
    k.bound = opt.contrast_threshold;
    k.require_below = false;

    Scenario v = base;
    v.name = "slit-with-readout";
    SlitWindow sw;
    sw.slit.half_width = 8.0 * dy;
    v.operation = sw;
    const BipartiteWave state = final_state(v);
    const WavenumberDistribution d_unc = particle2_distribution(state);
    const ApertureSpec ap{0.0, 8.0 * dy};
    const WavenumberDistribution averaged = averaged_from_state(state, ap);
    c.metric = distribution_distance(averaged, d_unc).max_abs;

    const ProjectionOutcome branch =
        project_aperture(state, aperture_nodes(state.grid, ap));
    conditional_d = particle2_distribution(branch.state);
    k.metric = distribution_distance(*conditional_d, d_unc).total_variation;
    k.extras.emplace_back("aperture-probability", branch.probability);
    k.extras.emplace_back("conditional-spectral-width", spectral_width(*conditional_d));
    k.extras.emplace_back("unconditional-spectral-width", spectral_width(d_unc));

    c.seconds = now_seconds() - t0;
    k.seconds = c.seconds;
    report.checks.push_back(std::move(c));
    report.checks.push_back(std::move(k));
  }

  // --- bandwidth preservation ------------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "bandwidth-preservation";
    c.detail = "unconditional D mass outside the source band after the narrowest slit";
    c.bound = opt.bandwidth_tolerance;
    c.metric = bandwidth_check(*narrow_d, base.source.band_limit,
                               opt.bandwidth_tolerance)
                   .outside_mass;
    // Conditionals are exempt from the claim; recorded for inspection only.
    c.extras.emplace_back("conditional-outside-mass",
                          band_mass_outside(*conditional_d, base.source.band_limit));
    c.extras.emplace_back(
        "free-outside-mass",
        band_mass_outside(free_res.distribution, base.source.band_limit));
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- Parseval chain ---------------------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "parseval-chain";
    c.detail =
        "worst |1 - x| for state norm, spectral norm, and sum D dk at every stage";
    c.bound = opt.no_signal_tolerance;
    const auto stage = [&c](const char* label, const BipartiteWave& st) {
      const GridSpec& g = st.grid;
      const double norm2 = weighted_norm_sq(st);
      const std::vector<cx> spec = spectral_components(st);
      const double spec2 = kernels::squared_norm(spec.data(), spec.size()) *
                           g.wavenumber_spacing * g.wavenumber_spacing;
      const WavenumberDistribution d = particle2_distribution(st);
      double dsum = 0.0;
      for (double v : d.values()) dsum += v;
      dsum *= g.wavenumber_spacing;
      const double worst = std::max({std::abs(norm2 - 1.0), std::abs(spec2 - 1.0),
                                     std::abs(dsum - 1.0)});
      c.metric = std::max(c.metric, worst);
      c.extras.emplace_back(label, worst);
    };
    BipartiteWave st =
        build_epr_state(scenario_source(base, grid), base.mass1, base.mass2, base.hbar);
    stage("stage-built", st);
    st = free_propagate(st, base.pre_flight);
    stage("stage-preflight", st);
    SlitScreen slit;
    slit.half_width = 8.0 * dy;
    slit.barrier_height = default_barrier_height(grid, base.mass1, base.hbar);
    slit.edge_smoothing = default_edge_smoothing(grid);
    st = split_step(st, slit_operation(slit), slit_duration, 64);
    stage("stage-slit", st);
    st = free_propagate(st, base.post_flight);
    stage("stage-postflight", st);
    const ApertureSpec ap{0.0, 8.0 * dy};
    const auto nodes = aperture_nodes(grid, ap);
    stage("stage-inside-branch", project_aperture(st, nodes).state);
    std::vector<char> inside(grid.num_points, 0);
    for (std::size_t node : nodes) inside[node] = 1;
    std::vector<std::size_t> complement;
    for (std::size_t i = 0; i < grid.num_points; ++i) {
      if (!inside[i]) complement.push_back(i);
    }
    stage("stage-outside-branch", project_aperture(st, complement).state);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- Monte Carlo concordance -----------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "sampling-concordance";
    c.detail = "worst |count - n p| / sqrt(n p (1 - p)) over Bob marginal cells";
    c.bound = 4.0;
    CheckRecord d;
    d.name = "sampling-determinism";
    d.detail = "max count difference for a repeated fixed-seed draw";
    d.bound = 0.0;

    const std::uint64_t n_pairs = 100000;
    std::mt19937_64 eng(opt.seed + 4242);
    for (int s = 0; s < 10; ++s) {
      const std::size_t d1 = 2 + static_cast<std::size_t>(eng() % 7);
      const std::size_t d2 = 2 + static_cast<std::size_t>(eng() % 7);
      std::vector<cx> coeffs(d1 * d2);
      for (auto& z : coeffs) z = gaussian_pair(eng);
      const DiscreteBipartite state =
          DiscreteBipartite::normalized(d1, d2, std::move(coeffs));
      const std::uint64_t draw_seed = opt.seed + 9000 + static_cast<std::uint64_t>(s);
      const std::vector<std::uint64_t> counts = sample_joint(state, draw_seed, n_pairs);
      if (s == 0) {
        const std::vector<std::uint64_t> again = sample_joint(state, draw_seed, n_pairs);
        double diff = 0.0;
        for (std::size_t t = 0; t < counts.size(); ++t) {
          diff = std::max(diff, std::abs(static_cast<double>(counts[t]) -
                                         static_cast<double>(again[t])));
        }
        d.metric = diff;
      }
      const std::vector<double> rho2 = bob_marginal(state);
      for (std::size_t j = 0; j < d2; ++j) {
        std::uint64_t cell = 0;
        for (std::size_t i = 0; i < d1; ++i) cell += counts[i * d2 + j];
        const double p = rho2[j];
        const double variance = static_cast<double>(n_pairs) * p * (1.0 - p);
        if (variance > 1e-9) {
          const double dev =
              std::abs(static_cast<double>(cell) - static_cast<double>(n_pairs) * p) /
              std::sqrt(variance);
          c.metric = std::max(c.metric, dev);
        } else if (cell != 0) {
          c.metric = std::max(c.metric, 1e9);  // mass in a zero-probability cell
        }
      }
    }
    c.extras.emplace_back("pairs-per-state", static_cast<double>(n_pairs));
    c.extras.emplace_back("state-count", 10.0);
    c.seconds = now_seconds() - t0;
    d.seconds = c.seconds;
    report.checks.push_back(std::move(c));
    report.checks.push_back(std::move(d));
  }

  // --- negative controls -------------------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "rejects-nonunitary";
    c.detail = "Gram defect of a norm-inflating operation that must be refused";
    c.bound = kUnitarityTolerance;
    c.require_below = false;
    const std::size_t n = small_grid.num_points;
    std::vector<cx> bad(n * n, cx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) bad[i * n + i] = cx(1.0 + 1e-3, 0.0);
    try {
      (void)apply_local_unitary(small_state, bad);
      c.metric = 0.0;  // wrongly accepted: the check fails
      c.detail += " (operation was accepted; this is a failure)";
    } catch (const NonUnitaryError& err) {
      c.metric = err.defect();
    }
    c.extras.emplace_back("norm-inflation", 1e-3);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "detects-source-change";
    c.detail = "max-abs distance for a deliberately modified source (must exceed bound)";
    c.bound = 1e-3;
    c.require_below = false;
    Scenario modified = free_base;
    modified.name = "modified-source";
    modified.source.sigma_k = 2.5;
    const auto dist = distribution_distance(run_scenario(modified).distribution,
                                            free_res.distribution);
    c.metric = dist.max_abs;
    c.extras.emplace_back("tv", dist.total_variation);
    c.extras.emplace_back("meets-no-signal-tolerance",
                          dist.max_abs <= opt.no_signal_tolerance ? 1.0 : 0.0);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- spectral column factorization ------------------------------------------
  {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "factorization-columns";
    c.detail =
        "worst phase-aligned normalized column deviation between two sources "
        "under one slit";
    c.bound = opt.factorization_tolerance;

    const std::size_t n = small_grid.num_points;
    Scenario s1 = base;
    s1.grid_points = n;
    s1.source.phase_seed = opt.seed + 31;
    Scenario s2 = s1;
    s2.source.sigma_k = 2.5;
    s2.source.phase_seed = opt.seed + 32;
    SlitWindow sw;
    sw.slit.half_width = 8.0 * small_grid.node_spacing;
    s1.operation = sw;
    s2.operation = sw;

    const std::vector<cx> spec1 = spectral_components(final_state(s1));
    const std::vector<cx> spec2 = spectral_components(final_state(s2));
    const auto w1 = scenario_source(s1, small_grid).values();
    const auto w2 = scenario_source(s2, small_grid).values();
    double peak1 = 0.0, peak2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      peak1 = std::max(peak1, std::abs(w1[j]));
      peak2 = std::max(peak2, std::abs(w2[j]));
    }
    int shared = 0;
    for (std::size_t j2 = 0; j2 < n; ++j2) {
      if (std::abs(w1[j2]) <= 1e-6 * peak1 || std::abs(w2[j2]) <= 1e-6 * peak2) {
        continue;
      }
      ++shared;
      double n1 = 0.0, n2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        n1 += std::norm(spec1[i * n + j2]);
        n2 += std::norm(spec2[i * n + j2]);
      }
      n1 = std::sqrt(n1);
      n2 = std::sqrt(n2);
      cx inner(0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        inner += std::conj(spec2[i * n + j2] / n2) * (spec1[i * n + j2] / n1);
      }
      const double mag = std::abs(inner);
      const cx align = mag > 0.0 ? inner / mag : cx(1.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const cx diff = spec1[i * n + j2] / n1 - align * (spec2[i * n + j2] / n2);
        c.metric = std::max(c.metric, std::abs(diff));
      }
    }
    c.extras.emplace_back("shared-columns", static_cast<double>(shared));
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  // --- optional smuggled defect (must fail) -------------------------------------
  if (opt.injected_defect > 0.0) {
    double t0 = now_seconds();
    CheckRecord c;
    c.name = "injected-defect-control";
    c.detail =
        "max-abs deviation after a norm-inflating operation smuggled past the "
        "unitarity gate (expected to fail)";
    c.bound = opt.no_signal_tolerance;
    const std::size_t n = small_grid.num_points;
    std::vector<cx> bad(n * n, cx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      bad[i * n + i] = cx(1.0 + opt.injected_defect, 0.0);
    }
    BipartiteWave hacked = small_state;
    std::vector<cx> out(n * n);
    kernels::matrix_axis1(bad.data(), hacked.amplitudes.data(), out.data(), n);
    hacked.amplitudes = std::move(out);
    // The state is no longer normalized, so the distribution is assembled
    // from raw sums instead of the validating constructor.
    std::vector<cx> spec = hacked.amplitudes;
    const auto plan = shared_fft_plan(n);
    kernels::spectrum_axis1(spec.data(), n, *plan, true);
    kernels::spectrum_axis2(spec.data(), n, *plan, true);
    kernels::scale(spec.data(), spec.size(),
                   small_grid.node_spacing / small_grid.wavenumber_spacing);
    std::vector<double> raw(n, 0.0);
    kernels::sumsq_over_axis1(spec.data(), n, raw.data());
    for (std::size_t j = 0; j < n; ++j) {
      c.metric = std::max(c.metric,
                          std::abs(raw[j] * small_grid.wavenumber_spacing -
                                   small_d0.values()[j]));
    }
    c.extras.emplace_back("injected-norm-inflation", opt.injected_defect);
    c.seconds = now_seconds() - t0;
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace nosignal
