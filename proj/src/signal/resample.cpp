// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/signal.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace nrse {

namespace {

constexpr double kKaiserBeta = 8.0;
constexpr int kZeroCrossings = 16;

RealVector design_lowpass(int up, int down, Index half_len)
{
  const double cutoff = 0.5 / std::max(up, down); // cycles per upsampled sample
  const Index n = 2 * half_len + 1;
  RealVector h(n);
  const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
  for (Index k = 0; k < n; ++k) {
    const double t = double(k - half_len);
    const double arg = 2.0 * cutoff * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = t / double(half_len);
    const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    h[k] = 2.0 * cutoff * sinc * win * up;
  }
  return h;
}

} // namespace

RealVector resample(const RealVector &x, int from_rate, int to_rate)
{
  require(from_rate > 0 && to_rate > 0, "resample: rates must be positive");
  if (from_rate == to_rate) { return x; }
  const int g = std::gcd(from_rate, to_rate);
  const int up = to_rate / g;
  const int down = from_rate / g;
  const Index half_len = Index(kZeroCrossings) * std::max(up, down);
  const RealVector h = design_lowpass(up, down, half_len);

  const Index n_in = x.size();
  const Index n_out = (n_in * up + down - 1) / down;
  RealVector y = RealVector::Zero(n_out);
  for (Index m = 0; m < n_out; ++m) {
    // Position in the zero-stuffed domain, shifted by the filter delay.
    const Index centre = m * down + half_len;
    // Only taps landing on nonzero upsampled samples contribute.
    Index k0 = centre % up;
    double acc = 0.0;
    for (Index k = k0; k < h.size(); k += up) {
      const Index src = (centre - k) / up;
      if (src < 0) { break; }
      if (src < n_in) { acc += h[k] * x[src]; }
    }
    y[m] = acc;
  }
  return y;
}

SampledSignal resample(const SampledSignal &x, int to_rate)
{
  return {resample(x.samples(), x.sample_rate(), to_rate), to_rate};
}

} // namespace nrse
