#ifndef GLMSTAB_RNG_HPP
#define GLMSTAB_RNG_HPP

#include <cstdint>

namespace glmstab {

// Counter-based splittable generator.
//
// A stream is a pair (key, counter). The k-th draw (k = 1, 2, ...) is
//
//     mix64(key + k * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer:
//
//     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//     z =  z ^ (z >> 31)
//
// so a stream is exactly SplitMix64 seeded with `key`. A child stream is
// derived without touching the parent's counter:
//
//     child(key, i).key = mix64(key ^ mix64(i + 0xD1B54A32D192ED03))
//
// Derived variates:
//   uniform01   (u >> 11) * 2^-53                        in [0, 1)
//   uniform_pos 1 - uniform01                            in (0, 1]
//   normal      sqrt(-2 ln u1) * cos(2 pi u2), u1 = uniform_pos, u2 = uniform01
//               (one variate per pair, the sine half is discarded)
//   index(n)    rejection sampling: draw u until u >= (2^64 - n) mod n,
//               return u mod n
//
// Every operation uses only 64-bit integer arithmetic and IEEE double
// operations with correctly rounded results except log/cos/sqrt, so runs are
// reproducible on any platform with the same libm.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  Stream child(std::uint64_t index) const noexcept {
    return Stream(mix64(key_ ^ mix64(index + 0xD1B54A32D192ED03ULL)));
  }

  double uniform01() noexcept;
  double uniform_pos() noexcept { return 1.0 - uniform01(); }
  double normal() noexcept;
  std::uint64_t index(std::uint64_t n);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace glmstab

#endif  // GLMSTAB_RNG_HPP
