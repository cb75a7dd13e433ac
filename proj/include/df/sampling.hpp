#pragma once

#include <cstdint>
#include <random>

#include "df/common.hpp"
#include "df/model.hpp"

namespace df::sampling {

// Deterministic random source.  Gaussian draws go through an explicit
// Box-Muller transform instead of std::normal_distribution, whose output is
// implementation-defined; this keeps every sampled object identical across
// standard libraries for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  Complex cnormal() { return {normal(), normal()}; }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Hermitian matrix with independent Gaussian entries (GUE normalization).
Matrix random_hermitian(Rng& rng, int n);

// Random density in {0 <= gamma <= 1, tr gamma <= q}: Haar-distributed
// orthonormal frame with uniform occupations rescaled into the trace budget.
Matrix random_density(Rng& rng, int dim, double q);

// Hermitian direction with unit weighted trace norm (x_norm below equals 1).
Matrix random_direction(Rng& rng, const model::ModelSpace& m);

} // namespace df::sampling
