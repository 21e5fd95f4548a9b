#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace hcsim {

/// Philox 4x32-10 counter block cipher.  Counter-based generation gives every
/// ensemble member its own stream addressed by (seed, purpose, id): draws are
/// reproducible bit for bit and independent of evaluation order.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block encrypt(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    const Block next = {
        std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
        std::uint32_t(p1),
        std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
        std::uint32_t(p0),
    };
    ctr = next;
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

/// Distinguishes independent uses of the same global seed.
enum class StreamPurpose : std::uint32_t {
  kTrajectory = 0,
  kSampling = 1,
  kCalibration = 2,
  kScratch = 3,
};

/// One addressable random stream: 64-bit draw counter in words 0..1 of the
/// philox counter, stream id and purpose in words 2..3.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t id)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        id_lo_(std::uint32_t(id)),
        id_hi_((std::uint32_t(purpose) << 24) |
               (std::uint32_t(id >> 32) & 0x00FFFFFFu)) {}

  philox::Block next_block() {
    const philox::Block ctr = {std::uint32_t(counter_),
                               std::uint32_t(counter_ >> 32), id_lo_, id_hi_};
    ++counter_;
    return philox::encrypt(ctr, key_);
  }

  /// Uniform double in [0, 1) from the top 53 bits of one block.
  double next_uniform() {
    const philox::Block b = next_block();
    const std::uint64_t u = (std::uint64_t(b[0]) << 32) | b[1];
    return double(u >> 11) * 0x1.0p-53;
  }

  std::uint64_t draws() const { return counter_; }

 private:
  philox::Key key_;
  std::uint32_t id_lo_, id_hi_;
  std::uint64_t counter_ = 0;
};

/// Standard normal variates via Box-Muller on top of a CounterStream.  Each
/// philox block yields exactly two normals, so consumption per draw is fixed
/// and replayable.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t id)
      : stream_(seed, purpose, id) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const philox::Block b = stream_.next_block();
    const std::uint64_t w1 = (std::uint64_t(b[0]) << 32) | b[1];
    const std::uint64_t w2 = (std::uint64_t(b[2]) << 32) | b[3];
    const double u1 = double((w1 >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = double(w2 >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t blocks_consumed() const { return stream_.draws(); }

 private:
  CounterStream stream_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hcsim
