#include "dyadot/rng.hpp"

namespace dyadot {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a followed by a finalizer so short labels spread over all 64 bits.
std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view label)
    : seed_(master_seed),
      label_(label),
      key_(mix64(mix64(master_seed ^ kGolden) ^ hash_label(label))) {}

RngStream::result_type RngStream::operator()() {
  // Two rounds of mixing over (key, counter); the second round breaks the
  // linear relation between consecutive counters.
  const std::uint64_t c = ++counter_;
  return mix64(mix64(key_ + c * kGolden) ^ key_);
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

RngStream RngStream::split(std::string_view child_label) const {
  std::string full = label_;
  full += '/';
  full += child_label;
  return RngStream(seed_, full);
}

RngStream replicate_stream(std::uint64_t master_seed, std::int64_t R, std::int64_t seed) {
  return RngStream(master_seed, "R" + std::to_string(R) + "/seed" + std::to_string(seed));
}

}  // namespace dyadot
