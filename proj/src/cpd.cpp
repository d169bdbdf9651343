#include "adafleet/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adafleet {

namespace {

// Lanczos coefficients, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

double log_gamma_core(double x) {
  // Valid for x >= 0.5.
  const double z = x - 1.0;
  double acc = kLanczos[0];
  for (int i = 1; i < 9; ++i) {
    acc += kLanczos[i] / (z + i);
  }
  const double t = z + kLanczosG + 0.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: x must be positive and finite");
  }
  if (x < 0.5) {
    // lnG(x) = lnG(x+1) - ln(x); exact recurrence keeps small-x accuracy.
    return log_gamma_core(x + 1.0) - std::log(x);
  }
  return log_gamma_core(x);
}

double digamma(double x) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw DomainError("digamma: x must be positive and finite");
  }
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series through the x^-14 Bernoulli term.
  double series = std::log(x) - 0.5 * inv;
  series -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
             inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 -
             inv2 / 12.0))))));
  return acc + series;
}

double trigamma(double x) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw DomainError("trigamma: x must be positive and finite");
  }
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv * (1.0 + 0.5 * inv);
  series += inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 -
             inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))));
  return acc + series;
}

double inverse_digamma(double y) {
  constexpr double kEulerGamma = 0.57721566490153286061;
  double x = (y >= -2.22) ? std::exp(y) + 0.5 : -1.0 / (y + kEulerGamma);
  if (!(x > 0)) x = 1e-12;
  for (int i = 0; i < 8; ++i) {
    const double step = (digamma(x) - y) / trigamma(x);
    x -= step;
    if (!(x > 0)) x = 1e-12;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

CompositionSample CompositionTransform::apply(std::span<const double> raw) const {
  if (raw.size() != lo.size()) {
    throw DomainError("composition transform: dimension mismatch");
  }
  std::vector<double> v(raw.size());
  double total = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw DomainError("composition transform: non-finite input");
    double scaled = 0.0;
    if (hi[i] > lo[i]) {
      scaled = std::clamp((raw[i] - lo[i]) / (hi[i] - lo[i]), 0.0, 1.0);
    }
    v[i] = scaled + epsilon;
    total += v[i];
  }
  for (double& e : v) e /= total;
  return {std::move(v)};
}

CompositionTransform learn_composition_bounds(
    std::span<const std::vector<double>> window, double epsilon) {
  if (window.empty()) throw DegenerateInput("composition: empty window");
  const std::size_t d = window.front().size();
  if (d < 2) throw DegenerateInput("composition: need at least 2 dimensions");
  CompositionTransform t;
  t.epsilon = epsilon;
  t.lo.assign(d, std::numeric_limits<double>::infinity());
  t.hi.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& raw : window) {
    if (raw.size() != d) throw DomainError("composition: ragged window");
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(raw[i])) throw DomainError("composition: non-finite input");
      t.lo[i] = std::min(t.lo[i], raw[i]);
      t.hi[i] = std::max(t.hi[i], raw[i]);
    }
  }
  bool any_varies = false;
  for (std::size_t i = 0; i < d; ++i) {
    if (t.hi[i] > t.lo[i]) any_varies = true;
  }
  if (!any_varies) {
    throw DegenerateInput("composition: every dimension constant over the window");
  }
  return t;
}

std::vector<CompositionSample> to_composition(
    std::span<const std::vector<double>> window, double epsilon) {
  const CompositionTransform t = learn_composition_bounds(window, epsilon);
  std::vector<CompositionSample> out;
  out.reserve(window.size());
  for (const auto& raw : window) out.push_back(t.apply(raw));
  return out;
}

namespace {

struct SuffStats {
  long count = 0;
  std::vector<double> mean_x;     // per-dimension mean of x
  std::vector<double> mean_logx;  // per-dimension mean of ln x
  std::vector<double> mean_x2;    // per-dimension mean of x^2
};

SuffStats stats_of(std::span<const CompositionSample> samples) {
  const std::size_t d = samples.front().values.size();
  SuffStats s;
  s.count = static_cast<long>(samples.size());
  s.mean_x.assign(d, 0.0);
  s.mean_logx.assign(d, 0.0);
  s.mean_x2.assign(d, 0.0);
  for (const auto& sample : samples) {
    if (sample.values.size() != d) throw DomainError("samples: inconsistent dimension");
    for (std::size_t l = 0; l < d; ++l) {
      const double x = sample.values[l];
      if (!(x > 0)) throw DomainError("samples: entries must be strictly positive");
      s.mean_x[l] += x;
      s.mean_logx[l] += std::log(x);
      s.mean_x2[l] += x * x;
    }
  }
  const double n = static_cast<double>(s.count);
  for (std::size_t l = 0; l < d; ++l) {
    s.mean_x[l] /= n;
    s.mean_logx[l] /= n;
    s.mean_x2[l] /= n;
  }
  return s;
}

std::vector<double> moment_matched_alpha(const SuffStats& s) {
  const std::size_t d = s.mean_x.size();
  // Average the implied concentration over dimensions with usable variance.
  double concentration = 0;
  int used = 0;
  for (std::size_t l = 0; l < d; ++l) {
    const double m = s.mean_x[l];
    const double v = s.mean_x2[l] - m * m;
    if (v > 1e-12 && m > 0 && m < 1) {
      concentration += m * (1.0 - m) / v - 1.0;
      ++used;
    }
  }
  concentration = (used > 0) ? concentration / used : static_cast<double>(d);
  if (!(concentration > 0)) concentration = static_cast<double>(d);
  std::vector<double> alpha(d);
  for (std::size_t l = 0; l < d; ++l) {
    alpha[l] = std::clamp(concentration * s.mean_x[l], kAlphaMin, kAlphaMax);
  }
  return alpha;
}

DirichletParams mle_from_stats(const SuffStats& s) {
  const std::size_t d = s.mean_x.size();
  if (s.count < static_cast<long>(d) + 2) {
    throw WindowTooSmall("dirichlet_mle: need at least d + 2 samples");
  }
  std::vector<double> alpha = moment_matched_alpha(s);
  for (int iter = 0; iter < 500; ++iter) {
    double sum = 0;
    for (double a : alpha) sum += a;
    const double psi_sum = digamma(sum);
    double max_delta = 0;
    for (std::size_t l = 0; l < d; ++l) {
      double next = inverse_digamma(psi_sum + s.mean_logx[l]);
      next = std::clamp(next, kAlphaMin, kAlphaMax);
      max_delta = std::max(max_delta, std::abs(next - alpha[l]));
      alpha[l] = next;
    }
    if (max_delta < 1e-8) break;
  }
  bool all_clamped = true;
  for (double a : alpha) {
    if (a > kAlphaMin && a < kAlphaMax) all_clamped = false;
  }
  if (all_clamped) {
    throw NonConvergence("dirichlet_mle: clamps bind on every component");
  }
  return {std::move(alpha)};
}

double ll_from_stats(const SuffStats& s, const DirichletParams& params) {
  const std::size_t d = params.alpha.size();
  if (s.mean_logx.size() != d) throw DomainError("log_likelihood: dimension mismatch");
  double sum_alpha = 0;
  double sum_lg = 0;
  for (double a : params.alpha) {
    sum_alpha += a;
    sum_lg += log_gamma(a);
  }
  double per_sample = log_gamma(sum_alpha) - sum_lg;
  for (std::size_t l = 0; l < d; ++l) {
    per_sample += (params.alpha[l] - 1.0) * s.mean_logx[l];
  }
  return per_sample * static_cast<double>(s.count);
}

}  // namespace

DirichletParams dirichlet_mle(std::span<const CompositionSample> samples) {
  if (samples.empty()) throw WindowTooSmall("dirichlet_mle: no samples");
  return mle_from_stats(stats_of(samples));
}

double log_likelihood(std::span<const CompositionSample> samples,
                      const DirichletParams& params) {
  if (samples.empty()) return 0.0;
  return ll_from_stats(stats_of(samples), params);
}

SplitEstimate estimate_2window(std::span<const CompositionSample> samples,
                               int min_segment) {
  if (samples.empty()) throw WindowTooSmall("estimate_2window: no samples");
  const std::size_t d = samples.front().values.size();
  const long t_total = static_cast<long>(samples.size());
  const long eff_min = std::max<long>(min_segment, static_cast<long>(d) + 2);
  if (t_total < 2 * eff_min) {
    throw WindowTooSmall("estimate_2window: window shorter than two segments");
  }

  // Prefix sums so each candidate segment's sufficient statistics are O(d).
  std::vector<double> px((t_total + 1) * d, 0.0);
  std::vector<double> plog((t_total + 1) * d, 0.0);
  std::vector<double> px2((t_total + 1) * d, 0.0);
  for (long i = 0; i < t_total; ++i) {
    const auto& v = samples[i].values;
    if (v.size() != d) throw DomainError("estimate_2window: inconsistent dimension");
    for (std::size_t l = 0; l < d; ++l) {
      const double x = v[l];
      if (!(x > 0)) throw DomainError("estimate_2window: nonpositive entry");
      px[(i + 1) * d + l] = px[i * d + l] + x;
      plog[(i + 1) * d + l] = plog[i * d + l] + std::log(x);
      px2[(i + 1) * d + l] = px2[i * d + l] + x * x;
    }
  }
  auto segment_stats = [&](long begin, long end) {
    SuffStats s;
    s.count = end - begin;
    s.mean_x.resize(d);
    s.mean_logx.resize(d);
    s.mean_x2.resize(d);
    const double n = static_cast<double>(s.count);
    for (std::size_t l = 0; l < d; ++l) {
      s.mean_x[l] = (px[end * d + l] - px[begin * d + l]) / n;
      s.mean_logx[l] = (plog[end * d + l] - plog[begin * d + l]) / n;
      s.mean_x2[l] = (px2[end * d + l] - px2[begin * d + l]) / n;
    }
    return s;
  };

  bool found = false;
  SplitEstimate best{0, -std::numeric_limits<double>::infinity()};
  for (long t = eff_min; t <= t_total - eff_min; ++t) {
    double ll;
    try {
      const SuffStats left = segment_stats(0, t);
      const SuffStats right = segment_stats(t, t_total);
      ll = ll_from_stats(left, mle_from_stats(left)) +
           ll_from_stats(right, mle_from_stats(right));
    } catch (const NonConvergence&) {
      continue;  // degenerate segment; this split is not a usable candidate
    }
    if (!found || ll > best.split_ll) {
      best = {static_cast<int>(t), ll};
      found = true;
    }
  }
  if (!found) {
    throw NonConvergence("estimate_2window: no admissible split converged");
  }
  return best;
}

ChangeReport detect_change(std::span<const CompositionSample> samples,
                           double threshold, int min_segment) {
  const DirichletParams q0 = dirichlet_mle(samples);
  const double ll0 = log_likelihood(samples, q0);
  const SplitEstimate split = estimate_2window(samples, min_segment);
  const double z = split.split_ll - ll0;
  return {split.change_index, z, z > threshold};
}

}  // namespace adafleet
