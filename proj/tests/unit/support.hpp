#pragma once

#include <cmath>
#include <vector>

#include "walsh/geometry.hpp"
#include "walsh/model.hpp"
#include "walsh/rng.hpp"

namespace testing {

inline walsh::RadialCoefficient constant(double c) { return walsh::RadialCoefficient::constant(c); }

inline walsh::SpinningMeasure planar(std::vector<double> w) {
  return walsh::SpinningMeasure::planar(w);
}

inline walsh::CoefficientField uniform_field(std::size_t rays, double g, double sigma) {
  return walsh::CoefficientField::uniform(rays, constant(g), constant(sigma));
}

/// Deterministic uniforms for property tests.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : s_(seed, 0, walsh::StreamTag::aux) {}
  double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * s_.uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(std::floor(s_.uniform() * (hi - lo + 1)));
  }

 private:
  walsh::Stream s_;
};

}  // namespace testing
