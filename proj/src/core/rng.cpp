#include "glmstab/rng.hpp"

#include <cmath>
#include <numbers>

#include "glmstab/error.hpp"

namespace glmstab {

double Stream::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::normal() noexcept {
  const double u1 = uniform_pos();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::index(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::Argument, "index() needs n >= 1");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t u = next_u64();
    if (u >= threshold) return u % n;
  }
}

}  // namespace glmstab
