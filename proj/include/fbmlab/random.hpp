#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbmlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output block is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
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

/// Stream identifier: which coordinate / component / purpose a draw belongs to.
/// Streams with distinct ids under one seed never share counters.
struct StreamId {
  std::uint32_t component = 0;
  std::uint32_t index = 0;
};

/// Random-access stream of standard normal variates. Variate i is a pure
/// function of (seed, stream, i), so results do not depend on the order in
/// which streams or indices are consumed.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, StreamId stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// i-th uniform in (0,1), 53-bit resolution.
  double uniform(std::uint64_t i) const noexcept {
    const auto out = raw(i / 2);
    const std::size_t base = (i % 2) * 2;
    return to_open_unit(out[base], out[base + 1]);
  }

  /// i-th standard normal (Box-Muller on one Philox block per pair).
  double normal(std::uint64_t i) const noexcept {
    const auto out = raw(i / 2);
    const double u1 = to_open_unit(out[0], out[1]);
    const double u2 = to_open_unit(out[2], out[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (i % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
  }

  /// Sequential access.
  double next_normal() noexcept { return normal(cursor_++); }
  double next_uniform() noexcept { return uniform(ucursor_++); }

 private:
  Philox4x32::Counter raw(std::uint64_t block) const noexcept {
    return Philox4x32::block({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                              stream_.component, stream_.index},
                             key_);
  }

  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  StreamId stream_;
  std::uint64_t cursor_ = 0;
  std::uint64_t ucursor_ = 0;
};

}  // namespace fbmlab
