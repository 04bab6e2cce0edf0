// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/nnese.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

namespace nrse::nnese {

namespace {

const double kSqrtHalfPi = std::sqrt(std::numbers::pi / 2.0);

Index frame_samples(const DateConfig &cfg, int rate)
{
  return std::max<Index>(16, Index(std::llround(cfg.frame_ms * 1e-3 * rate)));
}

RealVector sorted_magnitudes(const RealVector &frame)
{
  RealVector y = frame.abs();
  std::sort(y.begin(), y.end());
  return y;
}

FrameNoiseEstimate from_split(const RealVector &sorted, Index b, Index t_min, double xi)
{
  FrameNoiseEstimate e;
  e.b = b;
  e.t_min = t_min;
  e.xi = xi;
  e.c = adjustment_factor(xi);
  e.sigma_hat = kSqrtHalfPi * sorted.head(b).sum() / double(b);
  e.threshold = sorted[b - 1];
  return e;
}

} // namespace

void DateConfig::validate() const
{
  require(rho > 0.0, "DateConfig: rho must be positive");
  require(q > 0.0 && q < 1.0, "DateConfig: Q must lie in (0, 1)");
  require(alpha >= 0.0, "DateConfig: alpha must be non-negative");
  require(beta >= 0.0 && beta <= 1.0, "DateConfig: beta must lie in [0, 1]");
  require(frame_ms > 0.0, "DateConfig: frame length must be positive");
}

double detection_threshold(double rho)
{
  require(rho > 0.0, "detection_threshold: rho must be positive");
  // -expm1 keeps 1 - exp(-rho^2) accurate for small rho.
  return rho / 2.0 + std::log1p(std::sqrt(-std::expm1(-rho * rho))) / rho;
}

double adjustment_factor(double xi) { return xi * std::sqrt(std::numbers::pi) / std::sqrt(2.0); }

Index min_split(Index frame_len, double q)
{
  require(frame_len >= 1, "min_split: empty frame");
  const double t = double(frame_len) / 2.0 - double(frame_len) / std::sqrt(4.0 * double(frame_len) * (1.0 - q));
  return std::clamp<Index>(Index(std::floor(t)), 1, frame_len);
}

FrameNoiseEstimate date_estimate(const RealVector &frame, const DateConfig &cfg)
{
  cfg.validate();
  require(frame.size() >= 16, "date_estimate: frame shorter than 16 samples");
  const RealVector y = sorted_magnitudes(frame);
  const Index n = y.size();
  const double xi = detection_threshold(cfg.rho);
  const Index t_min = min_split(n, cfg.q);

  double sum = y.head(t_min - 1).sum();
  for (Index t = t_min; t <= n; ++t) {
    sum += y[t - 1];
    const double level = xi * kSqrtHalfPi * sum / double(t);
    const double below = t >= 2 ? y[t - 2] : 0.0;
    const double above = t < n ? y[t] : std::numeric_limits<double>::infinity();
    if (below <= level && level <= above) { return from_split(y, t, t_min, xi); }
  }
  return from_split(y, t_min, t_min, xi);
}

FrameNoiseEstimate date_estimate_fixed(const RealVector &frame, Index b, const DateConfig &cfg)
{
  cfg.validate();
  require(frame.size() >= 1, "date_estimate: empty frame");
  require(b >= 1 && b <= frame.size(), "date_estimate: split outside [1, T]");
  return from_split(sorted_magnitudes(frame), b, min_split(frame.size(), cfg.q), detection_threshold(cfg.rho));
}

RealVector attenuate(const RealVector &frame, const FrameNoiseEstimate &est, double alpha, double beta)
{
  require(alpha >= 0.0 && beta >= 0.0, "attenuate: factors must be non-negative");
  RealVector out(frame.size());
  for (Index i = 0; i < frame.size(); ++i) {
    const double y = frame[i];
    const double m = std::abs(y);
    out[i] = m > est.threshold ? std::copysign(std::max(m - alpha * est.sigma_hat, 0.0), y) : beta * y;
  }
  return out;
}

SampledSignal nnese_enhance(const SampledSignal &x, const DateConfig &cfg, std::vector<FrameTrace> *trace)
{
  cfg.validate();
  const Index t = frame_samples(cfg, x.sample_rate());
  RealVector y = x.samples();
  if (trace) { trace->clear(); }
  for (Index b = 0, l = 0; b < y.size(); b += t, ++l) {
    const Index n = std::min(t, y.size() - b);
    if (n < 16) { break; } // tail too short to estimate; left as is
    const RealVector frame = y.segment(b, n);
    const FrameNoiseEstimate est = date_estimate(frame, cfg);
    y.segment(b, n) = attenuate(frame, est, cfg.alpha, cfg.beta);
    if (trace) { trace->push_back({l, 0.0, est}); }
  }
  return {std::move(y), x.sample_rate()};
}

SampledSignal irmn_enhance(const SampledSignal &x, const mask::TFMask &irm, const Framing &mask_framing,
                           const DateConfig &cfg, std::vector<FrameTrace> *trace)
{
  cfg.validate();
  mask_framing.validate();
  const Index t = frame_samples(cfg, x.sample_rate());
  require(mask_framing.frame_len == t && t % mask_framing.hop == 0,
          "irmn_enhance: mask frames are not aligned with the denoising frames");
  require(irm.frames() == mask_framing.frame_count(x.size()),
          "irmn_enhance: mask frame count does not match the signal");
  const Index stride = t / mask_framing.hop;

  RealVector y = x.samples();
  if (trace) { trace->clear(); }
  for (Index b = 0, l = 0; b < y.size(); b += t, ++l) {
    const Index n = std::min(t, y.size() - b);
    const double phi = 1.0 - irm.row_fraction(l * stride);
    const Index split = std::clamp<Index>(Index(std::floor(double(n) * phi)), 1, n);
    const RealVector frame = y.segment(b, n);
    const FrameNoiseEstimate est = date_estimate_fixed(frame, split, cfg);
    y.segment(b, n) = attenuate(frame, est, cfg.alpha, cfg.beta);
    if (trace) { trace->push_back({l, phi, est}); }
  }
  return mask::apply_mask({std::move(y), x.sample_rate()}, irm, mask_framing);
}

void write_trace_csv(std::ostream &os, const std::vector<FrameTrace> &trace)
{
  os << "frame,phi,b,t_min,sigma_hat,threshold\n";
  for (const auto &f : trace) {
    os << f.frame << ',' << f.phi << ',' << f.est.b << ',' << f.est.t_min << ',' << f.est.sigma_hat << ','
       << f.est.threshold << '\n';
  }
}

} // namespace nrse::nnese
