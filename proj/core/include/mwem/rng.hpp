#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mwem {

// Deterministic random stream: a fixed seed yields a fixed sample sequence on
// every platform. All randomized operations in the library take one of these
// by reference; nothing draws from global state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  static constexpr std::string_view algorithm() { return "mt19937_64/53bit"; }

  // Uniform on [0, 1) with 53 random bits. Avoids std::uniform_real_distribution,
  // whose output is implementation-defined.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to pass to log().
  double next_open_double() { return 1.0 - next_double(); }

  std::uint64_t next_u64() { return engine_(); }

  bool next_bool() { return (engine_() >> 63) != 0; }

  // Uniform on [0, bound) without modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mwem
