#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace adafleet {

// All randomness flows through mt19937_64 streams plus the hand-rolled
// draws below. The engine's output sequence is pinned by the standard and
// the inversion/rejection samplers avoid the implementation-defined
// std::*_distribution algorithms, so runs are byte-reproducible across
// platforms and compilers.
using Rng = std::mt19937_64;

/// Independent stream seed for (base seed, stream id), splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

Rng make_stream(std::uint64_t base, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform index in [0, n); n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Poisson-distributed count drawn by CDF inversion. Means above 30 are
/// split into chunks and summed (Poisson additivity) to avoid underflow.
int poisson(Rng& rng, double mean);

/// Index drawn from unnormalized nonnegative weights by CDF walk.
/// Total weight must be positive.
std::size_t categorical(Rng& rng, std::span<const double> weights);

double normal01(Rng& rng);

/// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost trick.
double gamma_draw(Rng& rng, double shape);

std::vector<double> dirichlet_draw(Rng& rng, std::span<const double> alpha);

}  // namespace adafleet
