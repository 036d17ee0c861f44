#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace til {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Each (seed, stream_id) pair is an independent stream; simulation workers
// key streams by path index, so results do not depend on how paths are
// distributed over threads. The 128-bit counter is laid out as
// (block_lo, block_hi, stream_lo, stream_hi) and the key is the seed.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id),
                static_cast<std::uint32_t>(stream_id >> 32)} {}

  // Uniform double in (0, 1); never returns an endpoint.
  double uniform() {
    if (word_pos_ >= 2) next_block();
    const std::uint64_t bits = words_[word_pos_++];
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  void next_block() {
    std::array<std::uint32_t, 4> x = {static_cast<std::uint32_t>(block_),
                                      static_cast<std::uint32_t>(block_ >> 32),
                                      stream_[0], stream_[1]};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * x[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * x[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    words_[0] = (static_cast<std::uint64_t>(x[1]) << 32) | x[0];
    words_[1] = (static_cast<std::uint64_t>(x[3]) << 32) | x[2];
    word_pos_ = 0;
    ++block_;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int word_pos_ = 2;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace til
