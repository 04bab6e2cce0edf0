// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "nrse/signal.hpp"

namespace nrse {

enum class ConvolutionMethod
{
  Fft,
  Direct
};

// Full linear convolution, length len(s) + len(h) - 1.
RealVector convolve(const RealVector &s, const RealVector &h, ConvolutionMethod method = ConvolutionMethod::Fft);
SampledSignal convolve_rir(const SampledSignal &s, const SampledSignal &h,
                           ConvolutionMethod method = ConvolutionMethod::Fft);

enum class NoiseFit
{
  Loop,  // repeat noise shorter than the signal
  Error  // reject noise shorter than the signal
};

// Noise segment (starting at `offset`) scaled so that 10 log10(P_ref / P_noise) = snr_db.
SampledSignal scale_noise_to_snr(const SampledSignal &reference, const SampledSignal &noise, double snr_db,
                                 NoiseFit fit = NoiseFit::Loop, Index offset = 0);

SampledSignal mix_at_snr(const SampledSignal &reverberant, const SampledSignal &noise, double snr_db,
                         NoiseFit fit = NoiseFit::Loop, Index offset = 0);

// 10 log10(P_signal / P_noise).
double snr_db(const RealVector &signal, const RealVector &noise);

} // namespace nrse
