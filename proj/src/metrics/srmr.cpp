// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <array>
#include <complex>
#include <numbers>

#include "nrse/fft.hpp"
#include "nrse/framing.hpp"
#include "nrse/metrics.hpp"

namespace nrse::metrics {

namespace {

constexpr int kRate = 16000;
constexpr Index kChannels = 23;
constexpr double kLowCf = 125.0;
constexpr Index kModBands = 8;
constexpr double kModLow = 4.0, kModHigh = 128.0, kModQ = 2.0;
constexpr double kEarQ = 9.26449, kMinBw = 24.7;
constexpr double kWinS = 0.256, kHopS = 0.064;

struct Biquad
{
  double b0, b1, b2, a1, a2; // a0 = 1

  void run(RealVector &x) const
  {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (Index i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      const double y = b0 * xi + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = xi;
      y2 = y1;
      y1 = y;
      x[i] = y;
    }
  }
};

// ERB-spaced centre frequencies from low to fs/2, ascending.
RealVector erb_space(double low, double high, Index n)
{
  RealVector cf(n);
  const double c = kEarQ * kMinBw;
  for (Index i = 1; i <= n; ++i) {
    cf[n - i] = -c + std::exp(double(i) * (-std::log(high + c) + std::log(low + c)) / double(n)) * (high + c);
  }
  return cf;
}

// Fourth-order gammatone as four cascaded biquads, unit gain at cf.
std::array<Biquad, 4> gammatone(double cf, double fs)
{
  using C = std::complex<double>;
  const double t = 1.0 / fs;
  const double erb = cf / kEarQ + kMinBw;
  const double b = 1.019 * 2.0 * std::numbers::pi * erb;
  const double arg = 2.0 * cf * std::numbers::pi * t;
  const C vec = std::exp(C(0.0, 2.0 * arg));
  const double rt_pos = std::sqrt(3.0 + std::pow(2.0, 1.5));
  const double rt_neg = std::sqrt(3.0 - std::pow(2.0, 1.5));
  const double common = -t * std::exp(-b * t);
  const double k[4] = {std::cos(arg) + rt_pos * std::sin(arg), std::cos(arg) - rt_pos * std::sin(arg),
                       std::cos(arg) + rt_neg * std::sin(arg), std::cos(arg) - rt_neg * std::sin(arg)};
  const C garg = std::exp(C(-b * t, arg));
  C prod = 1.0;
  for (double ki : k) { prod *= vec - garg * ki; }
  const C den = -1.0 / std::exp(b * t) + 1.0 + vec * (1.0 - std::exp(b * t));
  const double gain = std::abs(prod * std::pow(t * std::exp(b * t) / den, 4));

  const double a1 = -2.0 * std::cos(arg) / std::exp(b * t);
  const double a2 = std::exp(-2.0 * b * t);
  std::array<Biquad, 4> out;
  for (int i = 0; i < 4; ++i) {
    const double g = i == 0 ? gain : 1.0;
    out[std::size_t(i)] = {t / g, common * k[i] / g, 0.0, a1, a2};
  }
  return out;
}

// Second-order band-pass with quality factor q.
Biquad modulation_filter(double cf, double fs, double q)
{
  const double w0 = std::tan(2.0 * std::numbers::pi * cf / fs / 2.0);
  const double b0 = w0 / q;
  const double a0 = 1.0 + b0 + w0 * w0;
  return {b0 / a0, 0.0, -b0 / a0, (2.0 * w0 * w0 - 2.0) / a0, (1.0 - b0 + w0 * w0) / a0};
}

RealVector hilbert_envelope(const RealVector &x)
{
  const Index n = x.size();
  ComplexVector spec = fft::forward(ComplexVector(x.cast<Cx>()));
  // Analytic signal: double positive frequencies, drop negative ones.
  for (Index k = 1; k < (n + 1) / 2; ++k) { spec[k] *= 2.0; }
  for (Index k = n / 2 + 1; k < n; ++k) { spec[k] = 0.0; }
  return fft::inverse(spec).abs();
}

} // namespace

SrmrDetail srmr_detail(const SampledSignal &in)
{
  require(in.duration() >= 0.5, "srmr: need at least 0.5 s of audio");
  const RealVector x = in.sample_rate() == kRate ? in.samples() : resample(in.samples(), in.sample_rate(), kRate);
  const double fs = kRate;

  SrmrDetail d;
  d.acoustic_cf = erb_space(kLowCf, fs / 2.0, kChannels);
  d.modulation_cf.resize(kModBands);
  for (Index j = 0; j < kModBands; ++j) {
    d.modulation_cf[j] = kModLow * std::pow(kModHigh / kModLow, double(j) / double(kModBands - 1));
  }

  const Index win = Index(std::llround(kWinS * fs));
  const Index hop = Index(std::llround(kHopS * fs));
  const Index frames = x.size() >= win ? 1 + (x.size() - win) / hop : 1;
  const RealVector w = make_window(WindowKind::Hamming, win);

  d.energy = RealMatrix::Zero(kChannels, kModBands);
  for (Index c = 0; c < kChannels; ++c) {
    RealVector band = x;
    for (const Biquad &bq : gammatone(d.acoustic_cf[c], fs)) { bq.run(band); }
    const RealVector env = hilbert_envelope(band);
    for (Index j = 0; j < kModBands; ++j) {
      RealVector m = env;
      modulation_filter(d.modulation_cf[j], fs, kModQ).run(m);
      double e = 0.0;
      for (Index l = 0; l < frames; ++l) {
        const Index n = std::min(win, m.size() - l * hop);
        e += (m.segment(l * hop, n) * w.head(n)).square().sum();
      }
      d.energy(c, j) = e / double(frames);
    }
  }

  // Acoustic bandwidth holding 90% of the energy sets the last modulation band.
  const RealVector per_channel = d.energy.rowwise().sum();
  const double total = per_channel.sum();
  require(total > 0.0, "srmr: silent signal");
  double cum = 0.0;
  double bw = d.acoustic_cf[kChannels - 1];
  for (Index c = 0; c < kChannels; ++c) {
    cum += per_channel[c];
    if (cum > 0.9 * total) {
      bw = d.acoustic_cf[c];
      break;
    }
  }
  // Upper -3 dB cutoff of each Q = 2 modulation band.
  auto upper = [&](Index j) {
    const double f = d.modulation_cf[j];
    return f * (std::sqrt(1.0 + 1.0 / (4.0 * kModQ * kModQ)) + 1.0 / (2.0 * kModQ));
  };
  d.k_star = 5;
  for (Index j = 4; j < kModBands; ++j) {
    if (bw > upper(j)) { d.k_star = j + 1; }
  }
  const double num = d.energy.leftCols(4).sum();
  const double den = d.energy.middleCols(4, d.k_star - 4).sum();
  require(den > 0.0, "srmr: no high-band modulation energy");
  d.score = num / den;
  return d;
}

double srmr(const SampledSignal &x) { return srmr_detail(x).score; }

} // namespace nrse::metrics
