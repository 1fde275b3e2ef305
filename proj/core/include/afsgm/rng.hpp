#pragma once

#include <array>
#include <cstdint>

namespace afsgm {

// Identifies one oracle draw. (stream, index) pairs uniquely determine the
// realized sample; replaying a token yields bitwise-identical results.
struct SampleToken {
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
};

// Philox4x32-10 counter-based generator block function.
// key = {stream}, counter = {index, subcounter}. Stateless and splittable:
// any (key, counter) pair can be evaluated independently of draw order.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t ctr_hi,
                                        std::uint64_t ctr_lo);

// Deterministic stream of uniforms/normals addressed by a SampleToken.
// Draws are a pure function of (token, position in stream).
class CounterStream {
 public:
  explicit CounterStream(SampleToken token) : key_(token.stream), hi_(token.index) {}
  CounterStream(std::uint64_t stream, std::uint64_t index) : key_(stream), hi_(index) {}

  std::uint64_t next_u64();
  // uniform on the open interval (0, 1)
  double next_uniform();
  // standard normal via Box-Muller; draws are consumed in pairs internally
  double next_normal();
  // uniform integer in [0, n) without modulo bias (fixed-point multiply)
  std::uint64_t next_index(std::uint64_t n);

 private:
  void refill();
  std::uint64_t key_;
  std::uint64_t hi_;
  std::uint64_t lo_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int word_pos_ = 4;  // forces refill on first use
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Derives an independent stream id from a base seed and a purpose tag, so
// distinct consumers (oracle draws, weight init, dataset synthesis) never
// share counters.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag);

}  // namespace afsgm
