// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "nrse/mask.hpp"

namespace nrse::omlsa {

struct NoiseTrackerConfig
{
  double smoothing = 0.8;       // periodogram recursive smoothing
  double window_s = 1.5;        // minimum search window
  double bias = 1.5;            // minimum-to-mean compensation
  double speech_ratio = 5.0;    // second pass skips bins above ratio x first estimate
  double floor = 1e-12;
  void validate() const;
};

struct LsaConfig
{
  double q1 = 0.02;    // speech absence probability, mask bit 1
  double q0 = 0.98;    // speech absence probability, mask bit 0
  double g1_db = -12.0;
  double g0_db = -25.0;
  double dd_alpha = 0.92;
  double xi_min_db = -25.0;
  NoiseTrackerConfig tracker;
  void validate() const;
};

// E1(v) = integral_v^inf e^-t / t dt.
double exp_int_e1(double v);

// (xi / (1 + xi)) exp(E1(v) / 2), v = xi gamma / (1 + xi), v floored at 1e-10.
double lsa_gain(double a_priori_snr, double a_posteriori_snr);

// G_H1^p G_min^(1 - p)
double combined_gain(double g_h1, double p, double g_min);

struct UnitParams
{
  double q = 0.0;
  double g_min = 1.0; // linear
};
UnitParams irmo_params(std::uint8_t bit, const LsaConfig &cfg = {});

// Per-unit gain: G_H1 floored at G_min, combined with p = 1 - q, capped at 1.
double unit_gain(double a_priori_snr, double a_posteriori_snr, const UnitParams &u);

// Noise PSD per frame and bin from a power spectrogram (frames x bins), with
// frame_rate frames per second.
RealMatrix track_noise_psd(const RealMatrix &power, double frame_rate, const NoiseTrackerConfig &cfg = {});

// Mask-driven log-spectral-amplitude enhancement on the STFT defined by framing.
// gains (optional) receives the applied frames x bins gain matrix.
SampledSignal irmo_enhance(const SampledSignal &x, const mask::TFMask &irm, const Framing &framing,
                           const LsaConfig &cfg = {}, RealMatrix *gains = nullptr);

} // namespace nrse::omlsa
