#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rvqmotion {

// Every random draw in the library goes through this engine so runs are
// reproducible from a single seed.
using Rng = std::mt19937_64;

// Uniform integer on [lo, hi] (inclusive) without relying on the
// implementation-defined std::uniform_int_distribution.
int64_t uniform_int(Rng& rng, int64_t lo, int64_t hi);

// Uniform real on [0, 1) built from the top 53 bits of one draw.
double uniform_unit(Rng& rng);

// Standard normal via Box-Muller (two draws per sample).
double standard_normal(Rng& rng);

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

} // namespace rvqmotion
