// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "nrse/framing.hpp"

namespace nrse {

// Complex STFT grid, frames x (nfft/2 + 1) bins.
struct TFGrid
{
  ComplexMatrix values;
  Framing framing;
  Index nfft = 0;
  Index signal_length = 0;
  int sample_rate = 0;

  Index frames() const { return values.rows(); }
  Index bins() const { return values.cols(); }
  double bin_hz(Index k) const { return double(k) * sample_rate / double(nfft); }
  RealMatrix power() const { return values.abs2(); }
  void validate() const;
};

// nfft = 0 uses frame_len.
TFGrid stft(const SampledSignal &x, const Framing &framing, Index nfft = 0);

// Least-squares inverse: y(n) = sum_l w(n - l hop) ifft_l / sum_l w^2(n - l hop).
SampledSignal istft(const TFGrid &grid);

} // namespace nrse
