#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace phaselab {

// Counter-based stream: draw number c of stream (seed, id) is a pure function of
// (seed, id, c), so a trial that derives its own stream sees the same values no
// matter which thread runs it or in what order.
__extension__ using uint128 = unsigned __int128;

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id), key_(mix(seed ^ mix(stream_id + kGamma))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  // Child stream keyed by (this stream, child). Does not advance this stream.
  RngStream derive(std::uint64_t child) const {
    return RngStream(seed_, mix(stream_id_ ^ mix(child ^ 0xD1B54A32D192ED03ULL)));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    uint128 m = static_cast<uint128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<uint128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bit() { return (next_u64() >> 63) != 0; }
  int sign() { return bit() ? -1 : 1; }

  // Standard normal via Box-Muller; the sine branch is dropped so every call
  // consumes exactly two draws.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly symmetric complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  std::string fingerprint() const {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx:%016llx", static_cast<unsigned long long>(seed_),
                  static_cast<unsigned long long>(stream_id_));
    return buf;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace phaselab
