#pragma once

#include <random>

#include "gldual/grid.hpp"

namespace gldual {

using Rng = std::mt19937_64;

/// Sum of a few random sine modes plus a random constant offset, scaled by
/// `amplitude`. Deterministic for a given generator state.
Field random_smooth_field(const Grid& grid, Rng& rng, double amplitude, int modes = 4);

/// Independent N(0, sigma^2) node values.
Field random_normal_field(const Grid& grid, Rng& rng, double sigma);

}  // namespace gldual
