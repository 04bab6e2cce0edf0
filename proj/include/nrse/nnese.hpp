// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <vector>

#include "nrse/framing.hpp"
#include "nrse/mask.hpp"

namespace nrse::nnese {

struct DateConfig
{
  double rho = 4.0;  // minimum SNR
  double q = 0.95;   // confidence
  double alpha = 1.0;
  double beta = 0.2;
  double frame_ms = 32.0;
  void validate() const;
};

struct FrameNoiseEstimate
{
  double sigma_hat = 0.0;
  Index b = 0;            // samples counted as noise
  Index t_min = 0;
  double xi = 0.0;
  double c = 0.0;
  double threshold = 0.0; // Y(b), the b-th smallest magnitude
};

// xi(rho) = rho/2 + ln(1 + sqrt(1 - exp(-rho^2))) / rho
double detection_threshold(double rho);
// c = xi Gamma(1/2) / (sqrt(2) Gamma(1))
double adjustment_factor(double xi);
// T/2 - T / sqrt(4 T (1 - Q)), clamped to [1, T].
Index min_split(Index frame_len, double q);

// Order-statistics noise estimate of one frame. The split b is the smallest
// t >= t_min with Y(t-1) <= xi sigma_t <= Y(t+1), sigma_t = sqrt(pi/2) mean(Y(1..t)).
FrameNoiseEstimate date_estimate(const RealVector &frame, const DateConfig &cfg = {});
// Same estimate with b supplied externally.
FrameNoiseEstimate date_estimate_fixed(const RealVector &frame, Index b, const DateConfig &cfg = {});

// |y| > threshold: magnitude reduced by alpha sigma (floored at 0, sign kept);
// otherwise scaled by beta.
RealVector attenuate(const RealVector &frame, const FrameNoiseEstimate &est, double alpha, double beta);

struct FrameTrace
{
  Index frame = 0;
  double phi = 0.0;
  FrameNoiseEstimate est;
};

// Non-overlapping frame-by-frame denoising with the scan-selected split.
SampledSignal nnese_enhance(const SampledSignal &x, const DateConfig &cfg = {},
                            std::vector<FrameTrace> *trace = nullptr);

// Mask-driven split b_l = max(1, floor(T (1 - mean_j IRM(l, j)))) followed by
// masking with the IRM. NNESE frame l reads mask row l T / hop, so the mask
// framing must use frame_len T and a hop dividing T.
SampledSignal irmn_enhance(const SampledSignal &x, const mask::TFMask &irm, const Framing &mask_framing,
                           const DateConfig &cfg = {}, std::vector<FrameTrace> *trace = nullptr);

void write_trace_csv(std::ostream &os, const std::vector<FrameTrace> &trace);

} // namespace nrse::nnese
