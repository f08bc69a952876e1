#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nvsense {

/// Philox4x32-10 block function (Salmon et al., Random123).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent stream purposes. Values are part of the reproducibility
/// contract: changing them changes every simulated population.
enum class StreamTag : std::uint32_t {
  sensor_sampling = 1,
  shot_noise_negative = 2,
  shot_noise_positive = 3,
  load_assignment = 4,
  test_oracle = 99,
};

/// Counter-based random stream keyed by (seed, tag, index).
///
/// Every (seed, tag, index) triple yields its own 2^32-block sequence, so
/// draws for item `index` never depend on how many other items were
/// generated or in which order. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
             static_cast<std::uint32_t>(tag), 0u} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

 private:
  void refill() {
    buffer_ = Philox4x32::block(ctr_, key_);
    ++ctr_[3];
    used_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

}  // namespace nvsense
