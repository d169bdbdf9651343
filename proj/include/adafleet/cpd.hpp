#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace adafleet {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WindowTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// d/dx ln Gamma(x) for x > 0 (recurrence shift to x >= 6, asymptotic series).
double digamma(double x);

/// Second derivative of ln Gamma; used by the digamma inversion.
double trigamma(double x);

/// Solves digamma(x) = y for x > 0 by Newton from Minka's initializer.
double inverse_digamma(double y);

// A strictly positive vector on the unit simplex.
struct CompositionSample {
  std::vector<double> values;
};

// Per-dimension min-max bounds learned from a window of raw feature
// vectors; apply() rescales, adds the pseudo-count, and renormalizes.
struct CompositionTransform {
  std::vector<double> lo;
  std::vector<double> hi;
  double epsilon = 1e-6;

  CompositionSample apply(std::span<const double> raw) const;
};

/// Learns bounds over the window. Throws DegenerateInput when every
/// dimension is constant across the window.
CompositionTransform learn_composition_bounds(
    std::span<const std::vector<double>> window, double epsilon);

/// Transforms a whole window into composition samples with bounds learned
/// from that window.
std::vector<CompositionSample> to_composition(
    std::span<const std::vector<double>> window, double epsilon);

struct DirichletParams {
  std::vector<double> alpha;
};

inline constexpr double kAlphaMin = 1e-4;
inline constexpr double kAlphaMax = 1e6;

/// Maximum-likelihood Dirichlet fit by fixed-point iteration
/// psi(alpha_l') = psi(sum alpha) + mean log x_l, with digamma inversion
/// by Newton. Needs at least d + 2 samples. Throws NonConvergence when
/// the [kAlphaMin, kAlphaMax] clamps bind on every component.
DirichletParams dirichlet_mle(std::span<const CompositionSample> samples);

double log_likelihood(std::span<const CompositionSample> samples,
                      const DirichletParams& params);

struct SplitEstimate {
  int change_index = 0;  // size of the left segment at the best split
  double split_ll = 0;   // summed two-segment log-likelihood
};

/// Best two-segment split: for each admissible t, fit both segments and
/// sum their log-likelihoods; ties resolve to the smallest t. Segments
/// shorter than min_segment are not considered.
SplitEstimate estimate_2window(std::span<const CompositionSample> samples,
                               int min_segment);

struct ChangeReport {
  int change_index = 0;
  double score = 0;  // LL* - LL_0
  bool detected = false;
};

ChangeReport detect_change(std::span<const CompositionSample> samples,
                           double threshold, int min_segment);

}  // namespace adafleet
