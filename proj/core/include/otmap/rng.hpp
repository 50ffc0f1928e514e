#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace otmap {

// Substream tags used when deriving independent seeds from one base seed.
// Each (base_seed, index, stream) triple maps to its own seed, so samplers,
// initializers and shuffles never share a generator state.
enum class SeedStream : std::uint64_t {
  XSample = 1,
  YSample = 2,
  Eval = 3,
  Init = 4,
  ShuffleX = 5,
  ShuffleY = 6,
  Objective = 7,
  Diagnostic = 8,
};

// SplitMix64 finalizer. Bijective on 64-bit words, used only for seed mixing.
std::uint64_t splitmix64(std::uint64_t z);

// Derives the seed for substream `stream` of repetition `index` from
// `base_seed`. Implemented as three chained SplitMix64 applications:
//   h = splitmix64(base_seed)
//   h = splitmix64(h ^ (0x9E3779B97F4A7C15 * (index + 1)))
//   h = splitmix64(h ^ stream_tag)
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index,
                          SeedStream stream);

// Deterministic random source built on std::mt19937_64, whose output
// sequence is fixed by the C++ standard. All variate transforms are written
// out here instead of using std::*_distribution, which the standard leaves
// implementation-defined; this keeps streams bit-identical across platforms
// and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits: (u64 >> 11) * 2^-53.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]: ((u64 >> 11) + 1) * 2^-53. Safe to pass to log().
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Each round consumes two uniforms and
  // yields two variates; the second is cached and returned on the next call.
  double normal();

  // Chi-squared with 6 degrees of freedom: -2 (ln U1 + ln U2 + ln U3),
  // the sum of three Exp(1/2) variates.
  double chi_squared6();

  // Student t with 6 degrees of freedom: Z / sqrt(V / 6) with Z standard
  // normal and V chi-squared(6). Consumes the normal first, then the
  // chi-squared draws.
  double student_t6();

  // Fisher-Yates shuffle: for i = n-1 .. 1, j = floor(uniform() * (i + 1)),
  // swap v[i] and v[j]. uniform() < 1 guarantees j <= i.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform() * static_cast<double>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace otmap
