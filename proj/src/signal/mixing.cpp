// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/mixing.hpp"

#include <cmath>

#include "nrse/fft.hpp"

namespace nrse {

RealVector convolve(const RealVector &s, const RealVector &h, ConvolutionMethod method)
{
  require(s.size() > 0 && h.size() > 0, "convolve: empty input");
  const Index n = s.size() + h.size() - 1;
  if (method == ConvolutionMethod::Direct) {
    RealVector y = RealVector::Zero(n);
    for (Index k = 0; k < h.size(); ++k) {
      y.segment(k, s.size()) += h[k] * s;
    }
    return y;
  }
  const Index nfft = next_pow2(n);
  RealVector a = RealVector::Zero(nfft), b = RealVector::Zero(nfft);
  a.head(s.size()) = s;
  b.head(h.size()) = h;
  const ComplexVector prod = fft::forward(a) * fft::forward(b);
  return fft::inverse(prod, nfft).head(n);
}

SampledSignal convolve_rir(const SampledSignal &s, const SampledSignal &h, ConvolutionMethod method)
{
  require(s.sample_rate() == h.sample_rate(), "convolve_rir: sample-rate mismatch (" +
                                                  std::to_string(s.sample_rate()) + " vs " +
                                                  std::to_string(h.sample_rate()) + ")");
  return {convolve(s.samples(), h.samples(), method), s.sample_rate()};
}

SampledSignal scale_noise_to_snr(const SampledSignal &reference, const SampledSignal &noise, double snr,
                                 NoiseFit fit, Index offset)
{
  require(reference.sample_rate() == noise.sample_rate(), "mix_at_snr: sample-rate mismatch");
  require(!reference.empty() && !noise.empty(), "mix_at_snr: empty input");
  const Index n = reference.size();
  require(fit == NoiseFit::Loop || noise.size() - offset >= n,
          "mix_at_snr: noise shorter than the signal");
  RealVector seg(n);
  for (Index i = 0; i < n; ++i) { seg[i] = noise.samples()[(offset + i) % noise.size()]; }

  const double p_ref = mean_power(reference.samples());
  const double p_noise = mean_power(seg);
  require(p_ref > 0.0, "mix_at_snr: zero-power signal");
  require(p_noise > 0.0, "mix_at_snr: zero-power noise");
  const double gain = std::sqrt(p_ref / (p_noise * std::pow(10.0, snr / 10.0)));
  return {seg * gain, reference.sample_rate()};
}

SampledSignal mix_at_snr(const SampledSignal &reverberant, const SampledSignal &noise, double snr, NoiseFit fit,
                         Index offset)
{
  const SampledSignal scaled = scale_noise_to_snr(reverberant, noise, snr, fit, offset);
  return {reverberant.samples() + scaled.samples(), reverberant.sample_rate()};
}

double snr_db(const RealVector &signal, const RealVector &noise)
{
  return 10.0 * std::log10(mean_power(signal) / mean_power(noise));
}

} // namespace nrse
