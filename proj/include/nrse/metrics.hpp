// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "nrse/signal.hpp"

namespace nrse::metrics {

// Short-time objective intelligibility in [-1, 1] (in practice [0, 1]):
// 10 kHz, 40 dB silent-frame removal, 15 third-octave bands from 150 Hz,
// 384 ms segments, -15 dB clipping.
double stoi(const SampledSignal &clean, const SampledSignal &processed);

// Third-octave band matrix (bands x (nfft/2 + 1)) with the nearest-bin edges.
RealMatrix third_octave_bands(int sample_rate, Index nfft, Index bands, double min_freq);

// Critical bands with their importance weights (sum 1 over the bands kept
// below Nyquist).
struct CriticalBands
{
  RealVector center_hz, lower_hz, upper_hz, weight;
  Index size() const { return center_hz.size(); }
  static CriticalBands ansi_s35(int sample_rate);
};

// Band SNR matrix (bands x frames) mapped through d = xi / (1 + xi), weighted
// by the band importance and averaged over frames. xi may be +inf.
double asii_from_snr(const RealMatrix &xi, const RealVector &weights);

// Clean versus residual (processed - clean) band SNRs over 32 ms / 50%
// Hamming frames in which the clean signal is within 40 dB of its loudest frame.
double asii_st(const SampledSignal &clean, const SampledSignal &processed);

// Speech-to-reverberation modulation energy ratio; needs at least 0.5 s.
double srmr(const SampledSignal &x);

struct SrmrDetail
{
  RealMatrix energy;      // acoustic channels (ascending cf) x modulation bands
  RealVector acoustic_cf;
  RealVector modulation_cf;
  Index k_star = 8;
  double score = 0.0;
};
SrmrDetail srmr_detail(const SampledSignal &x);

struct ExternalResult
{
  std::optional<double> value;
  bool timed_out = false;
  std::string error;
};

// Runs `command <clean.wav> <processed.wav>` (command split on whitespace)
// and parses the first float printed on stdout. Never throws for process or
// parse failures; they come back as a missing value.
ExternalResult external_metric(const std::string &command, const std::filesystem::path &clean,
                               const std::filesystem::path &processed,
                               std::chrono::milliseconds timeout = std::chrono::seconds(60));

} // namespace nrse::metrics
