#include "rvqmotion/common/random.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

int64_t uniform_int(Rng& rng, int64_t lo, int64_t hi) {
  if (hi < lo) {
    throw ConfigError("uniform_int: empty range");
  }
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) {
    return static_cast<int64_t>(rng());
  }
  // Rejection sampling removes modulo bias.
  const uint64_t limit = Rng::max() - (Rng::max() % span);
  uint64_t draw = rng();
  while (draw >= limit) {
    draw = rng();
  }
  return lo + static_cast<int64_t>(draw % span);
}

double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) {
    u1 = uniform_unit(rng);
  }
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (!in) {
    throw ParseError("invalid random engine state");
  }
}

} // namespace rvqmotion
