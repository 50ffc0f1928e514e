#include "otmap/rng.hpp"

#include <cmath>
#include <numbers>

namespace otmap {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index,
                          SeedStream stream) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return h;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::chi_squared6() {
  const double u1 = uniform_pos();
  const double u2 = uniform_pos();
  const double u3 = uniform_pos();
  return -2.0 * (std::log(u1) + std::log(u2) + std::log(u3));
}

double Rng::student_t6() {
  const double z = normal();
  const double v = chi_squared6();
  return z / std::sqrt(v / 6.0);
}

}  // namespace otmap
