#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "physim/errors.hpp"

namespace physim {

// Per-trial randomness. Streams are derived from one master seed by a
// counter-based split (see derive_stream_seed), so trial k draws the same
// numbers no matter which thread runs it or in which order trials complete.
//
// A stream can instead be constructed in forced mode: sample_index then pops a
// queued label per call, which is how exact chain enumeration and the
// "rng forcing first label" style of test drive the engine down a chosen branch.
class RngStream {
 public:
  static RngStream from_master(std::uint64_t master_seed, std::uint64_t stream_index);
  static RngStream forced(std::vector<std::size_t> labels);

  // Uniform double in [0, 1) built from the top 53 bits of the engine output.
  double next_uniform();

  // Samples an index proportional to the (nonnegative, positive-sum) weights.
  // Forced streams pop their next queued label instead; forcing a zero-weight
  // label is a programming error and raises IndexError.
  std::size_t sample_index(const std::vector<double>& weights);

  bool is_forced() const { return forced_mode_; }

 private:
  RngStream() = default;

  bool forced_mode_ = false;
  std::mt19937_64 engine_;
  std::vector<std::size_t> forced_labels_;
  std::size_t next_forced_ = 0;
};

// SplitMix64-style mix of (master_seed, stream_index) into an engine seed.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index);

}  // namespace physim
