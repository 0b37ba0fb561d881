#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace nosignal {

using cx = std::complex<double>;

// Thrown when an operator offered as a unitary fails the Gram test
// max |(U^dag U - I)_ab| <= 1e-10.
class NonUnitaryError : public std::runtime_error {
 public:
  NonUnitaryError(const std::string& what, double defect)
      : std::runtime_error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

// Thrown when a conditioning event has probability <= 1e-15: the conditional
// state is not defined.
class ZeroProbabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kUnitarityTolerance = 1e-10;
inline constexpr double kZeroProbability = 1e-15;

// Uniform double in [0, 1) from the top 53 bits of the engine output.
// std::uniform_real_distribution is implementation-defined; this mapping is
// fully specified, so sampled streams are reproducible across toolchains.
inline double uniform_unit(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log argument.
inline double uniform_positive(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

// Standard complex normal via Box-Muller (two engine draws per call).
inline cx gaussian_pair(std::mt19937_64& eng) {
  const double r = std::sqrt(-2.0 * std::log(uniform_positive(eng)));
  const double t = 6.283185307179586476925286766559 * uniform_unit(eng);
  return cx(r * std::cos(t), r * std::sin(t));
}

}  // namespace nosignal
