// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "nrse/types.hpp"

namespace nrse {

// Mono PCM samples with their sample rate. Immutable once built.
class SampledSignal
{
public:
  SampledSignal() = default;
  SampledSignal(RealVector samples, int sample_rate);

  const RealVector &samples() const { return samples_; }
  int sample_rate() const { return rate_; }
  Index size() const { return samples_.size(); }
  bool empty() const { return samples_.size() == 0; }
  double duration() const { return rate_ > 0 ? double(size()) / rate_ : 0.0; }

  SampledSignal scaled(double gain) const { return {samples_ * gain, rate_}; }
  SampledSignal head(Index n) const;

private:
  RealVector samples_;
  int rate_ = 0;
};

enum class WavEncoding
{
  Pcm16,
  Float32
};

struct WavReadOptions
{
  int resample_to = 0; // 0 keeps the file rate
};

// Multi-channel files are downmixed by averaging channels.
SampledSignal load_wav(const std::filesystem::path &path, const WavReadOptions &opts = {});
void write_wav(const std::filesystem::path &path, const SampledSignal &x,
               WavEncoding enc = WavEncoding::Pcm16);

// Rational polyphase resampling with a Kaiser-windowed sinc low-pass.
RealVector resample(const RealVector &x, int from_rate, int to_rate);
SampledSignal resample(const SampledSignal &x, int to_rate);

} // namespace nrse
