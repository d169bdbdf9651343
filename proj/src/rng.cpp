#include "adafleet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace adafleet {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng make_stream(std::uint64_t base, std::uint64_t stream) {
  return Rng(derive_seed(base, stream));
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  std::size_t i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

namespace {

int poisson_small(Rng& rng, double mean) {
  // Knuth inversion; safe for mean <= 30.
  const double limit = std::exp(-mean);
  double prod = uniform01(rng);
  int count = 0;
  while (prod > limit) {
    prod *= uniform01(rng);
    ++count;
  }
  return count;
}

}  // namespace

int poisson(Rng& rng, double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0) return 0;
  int total = 0;
  while (mean > 30.0) {
    total += poisson_small(rng, 30.0);
    mean -= 30.0;
  }
  return total + poisson_small(rng, mean);
}

std::size_t categorical(Rng& rng, std::span<const double> weights) {
  double total = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("categorical: negative weight");
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("categorical: zero total weight");
  double target = uniform01(rng) * total;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  // Rounding can land past the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return weights.size() - 1;
}

double normal01(Rng& rng) {
  // Box-Muller; one variate per call keeps the draw sequence position-free.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  while (u1 <= 0) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gamma_draw(Rng& rng, double shape) {
  if (shape <= 0) throw std::invalid_argument("gamma_draw: shape must be positive");
  if (shape < 1.0) {
    double u = uniform01(rng);
    while (u <= 0) u = uniform01(rng);
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal01(rng);
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    double u = uniform01(rng);
    while (u <= 0) u = uniform01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v;
    }
  }
}

std::vector<double> dirichlet_draw(Rng& rng, std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma_draw(rng, alpha[i]);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace adafleet
