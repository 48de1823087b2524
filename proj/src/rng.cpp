#include "physim/rng.hpp"

#include <string>

namespace physim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  // Two mixing rounds over master xor golden-ratio-stepped counter: adjacent
  // stream indices land far apart, and stream 0 differs from the master.
  return splitmix64(splitmix64(master_seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1))));
}

RngStream RngStream::from_master(std::uint64_t master_seed, std::uint64_t stream_index) {
  RngStream s;
  s.forced_mode_ = false;
  s.engine_.seed(derive_stream_seed(master_seed, stream_index));
  return s;
}

RngStream RngStream::forced(std::vector<std::size_t> labels) {
  RngStream s;
  s.forced_mode_ = true;
  s.forced_labels_ = std::move(labels);
  return s;
}

double RngStream::next_uniform() {
  if (forced_mode_) {
    throw IndexError("forced stream has no uniform source");
  }
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::sample_index(const std::vector<double>& weights) {
  if (weights.empty()) {
    throw IndexError("cannot sample from an empty weight vector");
  }
  if (forced_mode_) {
    if (next_forced_ >= forced_labels_.size()) {
      throw IndexError("forced stream exhausted after " +
                       std::to_string(forced_labels_.size()) + " labels");
    }
    const std::size_t label = forced_labels_[next_forced_++];
    if (label >= weights.size()) {
      throw IndexError("forced label " + std::to_string(label) + " out of range for " +
                       std::to_string(weights.size()) + " branches");
    }
    if (weights[label] <= 0.0) {
      throw IndexError("forced label " + std::to_string(label) + " has zero weight");
    }
    return label;
  }

  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  const double u = next_uniform() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cumulative += weights[k];
    if (u < cumulative) {
      return k;
    }
  }
  // Float roundoff can leave u at the top of the range; last positive weight wins.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) {
      return k;
    }
  }
  throw IndexError("cannot sample: all weights are zero");
}

}  // namespace physim
