// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <limits>
#include <numbers>

#include "nrse/fft.hpp"
#include "nrse/metrics.hpp"

namespace nrse::metrics {

namespace {

constexpr int kRate = 10000;
constexpr Index kFrame = 256;
constexpr Index kNfft = 512;
constexpr Index kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr Index kSegment = 30;
constexpr double kClipDb = -15.0;
constexpr double kDynRange = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Symmetric Hann without the zero end points.
RealVector hann_inner(Index n)
{
  RealVector w(n);
  for (Index i = 0; i < n; ++i) { w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i + 1) / double(n + 1)); }
  return w;
}

// Frame starts 0, hop, ... strictly below len - frame.
Index frame_starts(Index len, Index frame, Index hop)
{
  return len > frame ? (len - frame + hop - 1) / hop : 0;
}

void remove_silent_frames(const RealVector &x, const RealVector &y, RealVector &xs, RealVector &ys)
{
  const Index hop = kFrame / 2;
  const RealVector w = hann_inner(kFrame);
  const Index count = frame_starts(x.size(), kFrame, hop);
  require(count > 0, "stoi: signal too short");
  RealVector en(count);
  for (Index l = 0; l < count; ++l) {
    en[l] = 20.0 * std::log10((x.segment(l * hop, kFrame) * w).matrix().norm() + kEps);
  }
  const double top = en.maxCoeff();
  std::vector<Index> keep;
  for (Index l = 0; l < count; ++l) {
    if (top - kDynRange - en[l] < 0.0) { keep.push_back(l); }
  }
  const Index n = (Index(keep.size()) - 1) * hop + kFrame;
  xs = RealVector::Zero(n);
  ys = RealVector::Zero(n);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const Index b = Index(i) * hop;
    xs.segment(b, kFrame) += x.segment(keep[i] * hop, kFrame) * w;
    ys.segment(b, kFrame) += y.segment(keep[i] * hop, kFrame) * w;
  }
}

// Band envelopes, bands x frames.
RealMatrix band_envelopes(const RealVector &x, const RealMatrix &obm)
{
  const Index hop = kFrame / 2;
  const RealVector w = hann_inner(kFrame);
  const Index count = frame_starts(x.size(), kFrame, hop);
  RealMatrix out(obm.rows(), count);
  RealVector buf(kNfft);
  for (Index l = 0; l < count; ++l) {
    buf.setZero();
    buf.head(kFrame) = x.segment(l * hop, kFrame) * w;
    const RealVector p = fft::forward(buf).abs2();
    out.col(l) = (obm.matrix() * p.matrix()).array().sqrt();
  }
  return out;
}

} // namespace

RealMatrix third_octave_bands(int sample_rate, Index nfft, Index bands, double min_freq)
{
  const Index bins = nfft / 2 + 1;
  RealMatrix obm = RealMatrix::Zero(bands, bins);
  auto nearest = [&](double f) {
    Index best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < bins; ++k) {
      const double d = std::abs(double(k) * sample_rate / double(nfft) - f);
      if (d < dist) {
        dist = d;
        best = k;
      }
    }
    return best;
  };
  for (Index j = 0; j < bands; ++j) {
    const Index lo = nearest(min_freq * std::pow(2.0, (2.0 * double(j) - 1.0) / 6.0));
    const Index hi = nearest(min_freq * std::pow(2.0, (2.0 * double(j) + 1.0) / 6.0));
    if (hi > lo) { obm.row(j).segment(lo, hi - lo).setOnes(); }
  }
  return obm;
}

double stoi(const SampledSignal &clean, const SampledSignal &processed)
{
  require(clean.size() == processed.size(), "stoi: clean and processed lengths differ");
  require(clean.sample_rate() == processed.sample_rate(), "stoi: sample rates differ");
  require(clean.samples().abs().maxCoeff() > 0.0, "stoi: clean signal is silent");

  RealVector x = clean.samples(), y = processed.samples();
  if (clean.sample_rate() != kRate) {
    x = resample(x, clean.sample_rate(), kRate);
    y = resample(y, clean.sample_rate(), kRate);
  }
  RealVector xs, ys;
  remove_silent_frames(x, y, xs, ys);

  const RealMatrix obm = third_octave_bands(kRate, kNfft, kBands, kMinFreq);
  const RealMatrix xb = band_envelopes(xs, obm);
  const RealMatrix yb = band_envelopes(ys, obm);
  require(xb.cols() >= kSegment, "stoi: not enough speech frames for one 384 ms segment");

  const double clip = 1.0 + std::pow(10.0, -kClipDb / 20.0);
  double total = 0.0;
  Index count = 0;
  for (Index m = kSegment; m <= xb.cols(); ++m) {
    for (Index j = 0; j < kBands; ++j) {
      RealVector xe = xb.row(j).segment(m - kSegment, kSegment).transpose();
      const RealVector ye = yb.row(j).segment(m - kSegment, kSegment).transpose();
      const double scale = xe.matrix().norm() / (ye.matrix().norm() + kEps);
      RealVector yp = (ye * scale).min(xe * clip);
      yp -= yp.mean();
      xe -= xe.mean();
      yp /= yp.matrix().norm() + kEps;
      xe /= xe.matrix().norm() + kEps;
      total += (xe * yp).sum();
      ++count;
    }
  }
  return total / double(count);
}

} // namespace nrse::metrics
