#ifndef GIBBSLAB_RNG_HPP
#define GIBBSLAB_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace gibbslab {

// Philox4x32-10 counter-based generator. A (seed, stream) pair selects a
// reproducible stream; streams with distinct ids never overlap because the
// stream id occupies the high half of the 128-bit counter. Splitting for
// parallel replicas is therefore a pure function of the ids, independent of
// scheduling.
class Philox {
public:
  static constexpr const char* algorithm_name = "philox4x32-10";

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        block_(0),
        stream_(stream),
        index_(4) {}

  // Independent child stream. Callers hand out distinct ids.
  Philox split(std::uint64_t stream_id) const noexcept {
    return Philox(static_cast<std::uint64_t>(key_[0]) |
                      (static_cast<std::uint64_t>(key_[1]) << 32),
                  stream_id);
  }

  std::uint64_t stream() const noexcept { return stream_; }

  std::uint32_t next_u32() noexcept {
    if (index_ >= 4) refill();
    return buffer_[index_++];
  }

  std::uint64_t next_u64() noexcept {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe under log().
  double uniform_pos() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t value;
    do {
      value = next_u64();
    } while (value >= limit);
    return value % n;
  }

  double exponential(double rate) noexcept {
    return -std::log(uniform_pos()) / rate;
  }

  double normal() noexcept {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_normal_ = radius * std::sin(angle);
    have_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  // Marsaglia-Tsang, extended below 1 by the power boost.
  double gamma_variate(double shape) noexcept {
    if (shape < 1.0) {
      const double boost = std::pow(uniform_pos(), 1.0 / shape);
      return gamma_variate(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v;
      }
    }
  }

  // One raw 4x32 block for the given counter/key; exposed for known-answer
  // tests against the published vectors.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t product0 = 0xD2511F53ull * counter[0];
      const std::uint64_t product1 = 0xCD9E8D57ull * counter[2];
      const std::uint32_t lo0 = static_cast<std::uint32_t>(product0);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(product0 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(product1);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(product1 >> 32);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
  }

private:
  void refill() noexcept {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 4> out = block(counter, key_);
    buffer_[0] = out[0];
    buffer_[1] = out[1];
    buffer_[2] = out[2];
    buffer_[3] = out[3];
    ++block_;
    index_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 4> buffer_{};
  int index_;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace gibbslab

#endif
