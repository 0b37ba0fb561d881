#pragma once

#include <cstdint>
#include <vector>

#include "nosignal/entangle.hpp"

namespace nosignal {

// Finite two-party state with coefficients a[i * dim2 + j];
// sum |a_ij|^2 = 1 to 1e-12, enforced at construction.
class DiscreteBipartite {
 public:
  DiscreteBipartite(std::size_t dim1, std::size_t dim2, std::vector<cx> coeffs);

  // Rescales to unit norm first; rejects zero vectors.
  static DiscreteBipartite normalized(std::size_t dim1, std::size_t dim2,
                                      std::vector<cx> coeffs);

  std::size_t dim1() const noexcept { return dim1_; }
  std::size_t dim2() const noexcept { return dim2_; }
  const std::vector<cx>& coeffs() const noexcept { return coeffs_; }
  cx at(std::size_t i, std::size_t j) const { return coeffs_[i * dim2_ + j]; }

 private:
  std::size_t dim1_, dim2_;
  std::vector<cx> coeffs_;
};

// rho1_i = sum_j |a_ij|^2 and rho2_j = sum_i |a_ij|^2.
std::vector<double> alice_marginal(const DiscreteBipartite& state);
std::vector<double> bob_marginal(const DiscreteBipartite& state);

// rho2_{j|i} = |a_ij|^2 / rho1_i; throws ZeroProbabilityError when
// rho1_i <= 1e-15.
std::vector<double> bob_conditional(const DiscreteBipartite& state,
                                    std::size_t outcome);

struct CollapseOutcome {
  std::size_t outcome = 0;   // particle-1 index found
  double probability = 0.0;  // rho1_outcome
  DiscreteBipartite post_state;
};

// Ideal particle-1 readout with result `outcome`: rows other than the
// outcome are zeroed and the survivor is rescaled by rho1^{-1/2}.
CollapseOutcome collapse_on_alice(const DiscreteBipartite& state,
                                  std::size_t outcome);

// n_pairs i.i.d. joint draws from |a_ij|^2 with a fully specified generator
// mapping, so fixed seeds reproduce counts exactly across platforms.
// Returns counts[i * dim2 + j].
std::vector<std::uint64_t> sample_joint(const DiscreteBipartite& state,
                                        std::uint64_t seed, std::uint64_t n_pairs);

struct ProjectionOutcome {
  double probability = 0.0;
  BipartiteWave state;  // renormalized conditional state
};

// Ideal readout "particle 1 inside the listed position nodes": rows in the
// complement are zeroed, the captured probability recorded, the remainder
// renormalized. Throws ZeroProbabilityError when the captured probability
// is <= 1e-15.
ProjectionOutcome project_aperture(const BipartiteWave& state,
                                   const std::vector<std::size_t>& nodes);

}  // namespace nosignal
