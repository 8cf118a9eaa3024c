#pragma once
// Deterministic random streams.
//
// All randomness in the library flows through RngStream (xoshiro256++ state,
// seeded through splitmix64). Streams are derived from a master seed and a
// path of integer ids, e.g. derive(master, {kTrial, trial, worker, iter}),
// so that parallel trials/workers consume independent streams and results do
// not depend on scheduling order. The derivation is a pure hash of
// (master, path): identical inputs give identical streams on every run.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace desketch {

// Mixing constants / finalizer of splitmix64.
std::uint64_t splitmix64_next(std::uint64_t& state);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Stream id v1: fold each path element into the seed with a splitmix64
  // round. Changing the path in any position yields an unrelated stream.
  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on (0,1); safe as a log() argument.
  double uniform_open();
  // Standard normal (Box-Muller, one spare cached per stream).
  double gaussian();
  // Poisson(mean). Sequential inversion below kPoissonSwitch,
  // Hormann's PTRS transformed rejection above it. Exact in both regimes.
  std::uint64_t poisson(double mean);
  // Uniform integer in [0, n), unbiased (rejection from the top range).
  std::uint64_t uniform_index(std::uint64_t n);
  // True with probability p (p outside [0,1] clamps).
  bool bernoulli(double p);

  static constexpr double kPoissonSwitch = 30.0;
  static constexpr const char* kAlgorithmId = "xoshiro256++/splitmix64-path-v1";

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Draws indices from a fixed discrete distribution by inverting the CDF.
// Probabilities must be nonnegative with a positive sum; they are normalized
// internally. Draws are const and safe to issue from concurrent threads as
// long as each thread owns its RngStream.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const double* probs, std::size_t n);
  std::size_t draw(RngStream& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace desketch
