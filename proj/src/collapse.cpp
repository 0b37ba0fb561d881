#include "nosignal/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nosignal/kernels.hpp"

namespace nosignal {

namespace {

double sum_sq(const std::vector<cx>& v) {
  double acc = 0.0;
  for (const cx& z : v) acc += std::norm(z);
  return acc;
}

}  // namespace

DiscreteBipartite::DiscreteBipartite(std::size_t dim1, std::size_t dim2,
                                     std::vector<cx> coeffs)
    : dim1_(dim1), dim2_(dim2), coeffs_(std::move(coeffs)) {
  if (dim1_ == 0 || dim2_ == 0 || coeffs_.size() != dim1_ * dim2_) {
    throw std::invalid_argument("DiscreteBipartite: dimension mismatch");
  }
  for (const cx& z : coeffs_) {
    if (!(std::isfinite(z.real()) && std::isfinite(z.imag()))) {
      throw std::invalid_argument("DiscreteBipartite: non-finite coefficient");
    }
  }
  if (std::abs(sum_sq(coeffs_) - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteBipartite: coefficients are not normalized");
  }
}

DiscreteBipartite DiscreteBipartite::normalized(std::size_t dim1, std::size_t dim2,
                                                std::vector<cx> coeffs) {
  const double nrm = std::sqrt(sum_sq(coeffs));
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw std::invalid_argument("DiscreteBipartite: cannot normalize a zero vector");
  }
  for (cx& z : coeffs) z /= nrm;
  return DiscreteBipartite(dim1, dim2, std::move(coeffs));
}

std::vector<double> alice_marginal(const DiscreteBipartite& state) {
  std::vector<double> rho(state.dim1(), 0.0);
  for (std::size_t i = 0; i < state.dim1(); ++i) {
    for (std::size_t j = 0; j < state.dim2(); ++j) {
      rho[i] += std::norm(state.at(i, j));
    }
  }
  return rho;
}

std::vector<double> bob_marginal(const DiscreteBipartite& state) {
  std::vector<double> rho(state.dim2(), 0.0);
  for (std::size_t i = 0; i < state.dim1(); ++i) {
    for (std::size_t j = 0; j < state.dim2(); ++j) {
      rho[j] += std::norm(state.at(i, j));
    }
  }
  return rho;
}

std::vector<double> bob_conditional(const DiscreteBipartite& state,
                                    std::size_t outcome) {
  if (outcome >= state.dim1()) {
    throw std::invalid_argument("bob_conditional: outcome out of range");
  }
  double p = 0.0;
  for (std::size_t j = 0; j < state.dim2(); ++j) p += std::norm(state.at(outcome, j));
  if (p <= kZeroProbability) {
    throw ZeroProbabilityError("bob_conditional: outcome has zero probability");
  }
  std::vector<double> rho(state.dim2(), 0.0);
  for (std::size_t j = 0; j < state.dim2(); ++j) {
    rho[j] = std::norm(state.at(outcome, j)) / p;
  }
  return rho;
}

CollapseOutcome collapse_on_alice(const DiscreteBipartite& state,
                                  std::size_t outcome) {
  if (outcome >= state.dim1()) {
    throw std::invalid_argument("collapse_on_alice: outcome out of range");
  }
  double p = 0.0;
  for (std::size_t j = 0; j < state.dim2(); ++j) p += std::norm(state.at(outcome, j));
  if (p <= kZeroProbability) {
    throw ZeroProbabilityError("collapse_on_alice: outcome has zero probability");
  }
  std::vector<cx> post(state.dim1() * state.dim2(), cx(0.0, 0.0));
  const double inv = 1.0 / std::sqrt(p);
  for (std::size_t j = 0; j < state.dim2(); ++j) {
    post[outcome * state.dim2() + j] = state.at(outcome, j) * inv;
  }
  return CollapseOutcome{outcome, p,
                         DiscreteBipartite(state.dim1(), state.dim2(), std::move(post))};
}

std::vector<std::uint64_t> sample_joint(const DiscreteBipartite& state,
                                        std::uint64_t seed, std::uint64_t n_pairs) {
  const std::size_t cells = state.dim1() * state.dim2();
  std::vector<double> cumulative(cells, 0.0);
  double acc = 0.0;
  for (std::size_t t = 0; t < cells; ++t) {
    acc += std::norm(state.coeffs()[t]);
    cumulative[t] = acc;
  }
  // The last edge is pinned to 1 so a draw of u ~ 1 cannot fall off the end.
  cumulative[cells - 1] = 1.0;

  std::vector<std::uint64_t> counts(cells, 0);
  std::mt19937_64 eng(seed);
  for (std::uint64_t s = 0; s < n_pairs; ++s) {
    const double u = uniform_unit(eng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t cell = static_cast<std::size_t>(it - cumulative.begin());
    ++counts[cell];
  }
  return counts;
}

ProjectionOutcome project_aperture(const BipartiteWave& state,
                                   const std::vector<std::size_t>& nodes) {
  const std::size_t n = state.grid.num_points;
  if (n == 0 || state.amplitudes.size() != n * n) {
    throw std::invalid_argument("project_aperture: state length mismatch");
  }
  if (nodes.empty()) {
    throw std::invalid_argument("project_aperture: empty node set");
  }
  std::vector<char> keep(n, 0);
  for (std::size_t node : nodes) {
    if (node >= n) {
      throw std::invalid_argument("project_aperture: node index out of range");
    }
    keep[node] = 1;
  }

  ProjectionOutcome out;
  out.state = state;
  double captured = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cx* row = out.state.amplitudes.data() + i * n;
    if (keep[i]) {
      for (std::size_t j = 0; j < n; ++j) captured += std::norm(row[j]);
    } else {
      std::fill(row, row + n, cx(0.0, 0.0));
    }
  }
  const double dy = state.grid.node_spacing;
  out.probability = captured * dy * dy;
  if (out.probability <= kZeroProbability) {
    throw ZeroProbabilityError("project_aperture: captured probability is zero");
  }
  kernels::scale(out.state.amplitudes.data(), out.state.amplitudes.size(),
                 1.0 / std::sqrt(out.probability));
  return out;
}

}  // namespace nosignal
