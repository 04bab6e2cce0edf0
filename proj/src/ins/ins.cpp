// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/ins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "nrse/fft.hpp"

namespace nrse {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
  // splitmix64 finalizer over the combined key.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void InsConfig::validate() const
{
  require(!scales.empty(), "ins: at least one scale required");
  for (double s : scales) { require(s > 0.0 && s < 1.0, "ins: scales must lie in (0, 1)"); }
  require(n_surrogates >= 1, "ins: n_surrogates must be >= 1");
  require(n_tapers >= 1, "ins: n_tapers must be >= 1");
  require(min_taper_len >= 2, "ins: min_taper_len must be >= 2");
  require(confidence > 0.0 && confidence < 1.0, "ins: confidence must lie in (0, 1)");
}

SampledSignal make_surrogate(const SampledSignal &x, std::uint64_t seed)
{
  require(!x.empty(), "make_surrogate: empty signal");
  const Index n = x.size();
  ComplexVector spec = fft::forward(x.samples());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  // DC and (even n) Nyquist stay real so the inverse is real with the same magnitudes.
  const Index last = n % 2 == 0 ? spec.size() - 1 : spec.size();
  for (Index k = 1; k < last; ++k) { spec[k] = std::polar(std::abs(spec[k]), phase(rng)); }
  return {fft::inverse(spec, n), x.sample_rate()};
}

SurrogateSet make_surrogates(const SampledSignal &x, int n, std::uint64_t seed)
{
  require(n >= 1, "make_surrogates: n must be >= 1");
  SurrogateSet set;
  set.seed = seed;
  set.surrogates.reserve(std::size_t(n));
  for (int k = 0; k < n; ++k) { set.surrogates.push_back(make_surrogate(x, derive_seed(seed, std::uint64_t(k)))); }
  return set;
}

double gamma_p(double a, double x)
{
  require(a > 0.0, "gamma_p: shape must be positive");
  if (x <= 0.0) { return 0.0; }
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) { break; }
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  // Lentz continued fraction for the upper tail.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) { d = tiny; }
    c = b + an / c;
    if (std::abs(c) < tiny) { c = tiny; }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) { break; }
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double gamma_quantile(double shape, double scale, double p)
{
  require(shape > 0.0 && scale > 0.0, "gamma_quantile: parameters must be positive");
  require(p > 0.0 && p < 1.0, "gamma_quantile: p must lie in (0, 1)");
  double lo = 0.0, hi = std::max(1.0, shape);
  while (gamma_p(shape, hi) < p) { hi *= 2.0; }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gamma_p(shape, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * scale;
}

double stationarity_threshold(const RealVector &theta0, double confidence)
{
  const double mean = theta0.mean();
  require(mean > 0.0, "stationarity_threshold: surrogate variances must be positive");
  const RealVector ratio = theta0 / mean;
  const double var = (ratio - 1.0).square().mean();
  if (var <= 1e-12) { return 1.0; }
  // Moment matching with unit mean: shape = 1/var, scale = var.
  return std::sqrt(gamma_quantile(1.0 / var, var, confidence));
}

namespace {

double distance_variance(const RealVector &x, Index taper_len, const InsConfig &cfg)
{
  const RealVector d =
      local_global_distances(multitaper_spectrogram(x, taper_len, cfg.n_tapers, cfg.n_positions, cfg.max_nfft));
  return (d - d.mean()).square().mean();
}

} // namespace

InsProfile compute_ins(const SampledSignal &x, const InsConfig &cfg)
{
  cfg.validate();
  require(x.size() >= 2 * cfg.min_taper_len, "compute_ins: signal too short for the minimum taper length");
  require(x.samples().abs().maxCoeff() > 0.0, "compute_ins: all-zero signal has no defined spectral distance");

  InsProfile prof;
  prof.scales = cfg.scales;
  prof.n_surrogates = cfg.n_surrogates;
  prof.seed = cfg.seed;
  for (double s : cfg.scales) {
    const Index len = std::clamp(Index(std::lround(s * double(x.size()))), cfg.min_taper_len, x.size());
    prof.taper_lengths.push_back(std::max<Index>(len, cfg.n_tapers));
  }
  const Index n_scales = Index(cfg.scales.size());

  RealVector theta1(n_scales);
  for (Index i = 0; i < n_scales; ++i) { theta1[i] = distance_variance(x.samples(), prof.taper_lengths[std::size_t(i)], cfg); }

  RealMatrix theta0(cfg.n_surrogates, n_scales);
  for (int k = 0; k < cfg.n_surrogates; ++k) {
    const SampledSignal sur = make_surrogate(x, derive_seed(cfg.seed, std::uint64_t(k)));
    for (Index i = 0; i < n_scales; ++i) {
      theta0(k, i) = distance_variance(sur.samples(), prof.taper_lengths[std::size_t(i)], cfg);
    }
  }

  prof.values.resize(n_scales);
  prof.gamma.resize(n_scales);
  for (Index i = 0; i < n_scales; ++i) {
    const RealVector col = theta0.col(i);
    const double mean0 = col.mean();
    prof.values[i] = mean0 > 0.0 ? std::sqrt(theta1[i] / mean0) : 0.0;
    prof.gamma[i] = mean0 > 0.0 ? stationarity_threshold(col, cfg.confidence) : 1.0;
  }
  return prof;
}

bool is_stationary(const InsProfile &profile, double scale)
{
  for (std::size_t i = 0; i < profile.scales.size(); ++i) {
    if (std::abs(profile.scales[i] - scale) <= 1e-12) { return profile.values[Index(i)] <= profile.gamma[Index(i)]; }
  }
  throw Error("is_stationary: scale " + std::to_string(scale) + " not in profile");
}

void write_ins_csv(std::ostream &out, const InsProfile &p)
{
  out << "scale,taper_len,ins,gamma,stationary\n";
  for (std::size_t i = 0; i < p.scales.size(); ++i) {
    const Index j = Index(i);
    out << p.scales[i] << ',' << p.taper_lengths[i] << ',' << p.values[j] << ',' << p.gamma[j] << ','
        << (p.values[j] <= p.gamma[j] ? 1 : 0) << '\n';
  }
}

} // namespace nrse
