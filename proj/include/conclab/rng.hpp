#pragma once

#include <cmath>
#include <cstdint>

namespace conclab {

// Counter-based random streams: value = hash(seed, stream, index).
// No shared state; any (seed, stream) pair yields an independent,
// reproducible sequence regardless of evaluation order across workers.

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  StreamId sub(std::uint64_t k) const {
    // Derived stream for parallel fan-out (trial index, multi-start index...).
    return StreamId{seed, mix64(stream + 0x9e3779b97f4a7c15ULL * (k + 1))};
  }
};

inline std::uint64_t counter_value(const StreamId& id, std::uint64_t index) {
  std::uint64_t h = mix64(id.seed + 0x9e3779b97f4a7c15ULL) ^ mix64(id.stream + 0x8a183895eeac1536ULL);
  return mix64(h + 0xd6e8feb86659fd93ULL * (index + 1));
}

// Sequential view over one stream.  Cheap to construct; the counter is the
// only state, so a fresh Prng over the same StreamId replays the sequence.
class Prng {
 public:
  explicit Prng(StreamId id) : id_(id) {}

  std::uint64_t next_u64() { return counter_value(id_, ctr_++); }

  // uniform on [0, 1)
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1)
  double u01_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  double normal() {
    // Box-Muller; consumes two counter slots.
    double u1 = u01_open();
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free modulo is fine at our scales (bias < 2^-40 for n < 2^24).
    return next_u64() % n;
  }

 private:
  StreamId id_;
  std::uint64_t ctr_ = 0;
};

}  // namespace conclab
