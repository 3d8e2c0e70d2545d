#ifndef BWSHARE_RNG_HPP
#define BWSHARE_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace bwshare {

// xoshiro256** seeded through splitmix64. Variates are produced by the
// member functions below rather than <random> distributions, whose output is
// implementation-defined; paths must be reproducible across platforms.
//
// Substreams: Substream(k) returns a copy advanced by k calls of Jump(), i.e.
// k * 2^128 draws, so streams for different k never overlap in practice.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Advances the state by 2^128 draws.
  void Jump();
  Rng Substream(unsigned k) const;

  // Uniform on (0, 1), never exactly 0 or 1.
  double UniformOpen();
  double Exponential(double rate);
  double StandardNormal();

 private:
  std::array<std::uint64_t, 4> s_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bwshare

#endif  // BWSHARE_RNG_HPP
