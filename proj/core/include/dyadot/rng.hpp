#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace dyadot {

/// Counter-based random stream keyed by (master seed, label).
///
/// Output k of a stream is a fixed mixing function of (key, k), so two
/// streams with the same seed and label are bit-identical and streams with
/// different labels are decorrelated. Child streams are derived with
/// split(), which hashes the child label into the key; no state is shared
/// between a parent and its children. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::string_view label);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0,1) with 53 random bits.
  double uniform();

  RngStream split(std::string_view child_label) const;

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream of one (R, seed) replicate of an experiment; the samplers draw
/// from its "mu" and "nu" children.
RngStream replicate_stream(std::uint64_t master_seed, std::int64_t R, std::int64_t seed);

std::uint64_t mix64(std::uint64_t z);
std::uint64_t hash_label(std::string_view label);

}  // namespace dyadot
