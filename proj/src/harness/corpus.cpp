// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <random>

#include "nrse/fft.hpp"
#include "nrse/ins.hpp"

namespace nrse::corpus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vowel
{
  double f1, f2, f3;
};
constexpr Vowel kVowels[] = {{730, 1090, 2440}, {270, 2290, 3010}, {300, 870, 2240},
                             {530, 1840, 2480}, {570, 840, 2410},  {660, 1720, 2410}};

double formant_envelope(double f, const Vowel &v)
{
  auto bump = [f](double centre, double width) { return std::exp(-0.5 * std::pow((f - centre) / width, 2)); };
  const double tilt = 1.0 / (1.0 + f / 600.0);
  return tilt * (0.05 + bump(v.f1, 90.0) + 0.7 * bump(v.f2, 120.0) + 0.4 * bump(v.f3, 160.0));
}

// Raised-cosine onset and offset of `ramp` samples.
double ramp_gain(Index i, Index len, Index ramp)
{
  const Index r = std::min(ramp, len / 2);
  if (r <= 0) { return 1.0; }
  if (i < r) { return 0.5 - 0.5 * std::cos(std::numbers::pi * double(i) / double(r)); }
  if (i >= len - r) { return 0.5 - 0.5 * std::cos(std::numbers::pi * double(len - 1 - i) / double(r)); }
  return 1.0;
}

RealVector band_noise(Index n, double lo, double hi, int rate, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  RealVector x(n);
  for (Index i = 0; i < n; ++i) { x[i] = g(rng); }
  ComplexVector spec = fft::forward(x);
  for (Index k = 0; k < spec.size(); ++k) {
    const double f = double(k) * rate / double(n);
    if (f < lo || f > hi) { spec[k] = 0.0; }
  }
  RealVector y = fft::inverse(spec, n);
  const double rms = std::sqrt(y.square().mean());
  return rms > 0.0 ? RealVector(y / rms) : y;
}

void add_syllable(RealVector &out, Index start, Index len, double f0a, double f0b, const Vowel &v, int rate)
{
  const double f0_mean = 0.5 * (f0a + f0b);
  const int harmonics = std::max(1, int(4000.0 / f0_mean));
  RealVector amp(harmonics);
  RealVector phase = RealVector::Zero(harmonics);
  for (int h = 0; h < harmonics; ++h) { amp[h] = formant_envelope((h + 1) * f0_mean, v); }
  const Index ramp = Index(0.03 * rate);
  for (Index i = 0; i < len && start + i < out.size(); ++i) {
    const double f0 = f0a + (f0b - f0a) * double(i) / double(len);
    double s = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      phase[h] += kTwoPi * (h + 1) * f0 / rate;
      s += amp[h] * std::sin(phase[h]);
    }
    out[start + i] += s * ramp_gain(i, len, ramp);
  }
}

RealVector speech_stream(std::mt19937_64 &rng, Index n, int rate, double lead_s, double trail_s)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
  RealVector out = RealVector::Zero(n);
  const double base_f0 = uni(100.0, 210.0);
  const Index end = n - Index(trail_s * rate);
  Index t = Index(lead_s * rate);
  while (t < end) {
    const int syllables = 2 + int(u(rng) * 3.0);
    for (int s = 0; s < syllables && t < end; ++s) {
      if (u(rng) < 0.3) {
        const Index flen = Index(uni(0.05, 0.12) * rate);
        if (t + flen >= end) { break; }
        const RealVector fr = band_noise(flen, 2500.0, 7000.0, rate, rng) * uni(0.08, 0.2);
        for (Index i = 0; i < flen; ++i) { out[t + i] += fr[i] * ramp_gain(i, flen, Index(0.01 * rate)); }
        t += flen;
      }
      const Index slen = Index(uni(0.12, 0.28) * rate);
      if (t + slen >= end) { break; }
      const double f0a = base_f0 * uni(0.9, 1.15), f0b = base_f0 * uni(0.8, 1.05);
      const Vowel &v = kVowels[std::size_t(u(rng) * std::size(kVowels)) % std::size(kVowels)];
      RealVector syl = RealVector::Zero(slen);
      add_syllable(syl, 0, slen, f0a, f0b, v, rate);
      out.segment(t, slen) += syl * uni(0.5, 1.0);
      t += slen + Index(uni(0.0, 0.04) * rate);
    }
    t += Index(uni(0.08, 0.35) * rate);
  }
  return out;
}

void write_float(const std::filesystem::path &p, const SampledSignal &s) { write_wav(p, s, WavEncoding::Float32); }

} // namespace

SampledSignal speech_like(std::uint64_t seed, int rate, double seconds)
{
  require(rate > 0 && seconds >= 0.5, "speech_like: need a positive rate and at least 0.5 s");
  std::mt19937_64 rng(derive_seed(seed, 0x5eec));
  const Index n = Index(std::llround(seconds * rate));
  RealVector x = speech_stream(rng, n, rate, 0.15, 0.15);
  const double peak = x.abs().maxCoeff();
  if (peak > 0.0) { x *= 0.5 / peak; }
  return {std::move(x), rate};
}

SampledSignal babble(std::uint64_t seed, int rate, double seconds, int talkers)
{
  require(talkers >= 1, "babble: need at least one talker");
  const Index n = Index(std::llround(seconds * rate));
  RealVector x = RealVector::Zero(n);
  for (int k = 0; k < talkers; ++k) {
    std::mt19937_64 rng(derive_seed(seed, 0xbab0 + std::uint64_t(k)));
    x += speech_stream(rng, n, rate, 0.0, 0.0);
  }
  const double rms = std::sqrt(x.square().mean());
  require(rms > 0.0, "babble: silent output");
  return {x * (0.1 / rms), rate};
}

SampledSignal white_noise(std::uint64_t seed, int rate, double seconds)
{
  std::mt19937_64 rng(derive_seed(seed, 0x0e15e));
  std::normal_distribution<double> g(0.0, 0.1);
  RealVector x(Index(std::llround(seconds * rate)));
  for (Index i = 0; i < x.size(); ++i) { x[i] = g(rng); }
  return {std::move(x), rate};
}

SampledSignal exponential_rir(double t60, int rate, std::uint64_t seed, double drr_db)
{
  require(t60 > 0.0, "exponential_rir: T60 must be positive");
  std::mt19937_64 rng(derive_seed(seed, std::uint64_t(std::llround(t60 * 1000.0))));
  std::normal_distribution<double> g(0.0, 1.0);
  const Index n = std::max<Index>(2, Index(std::ceil(t60 * rate)));
  RealVector h(n);
  h[0] = 1.0;
  // Amplitude falls 60 dB (factor 1000) over t60.
  const double decay = std::log(1000.0) / (t60 * rate);
  for (Index i = 1; i < n; ++i) { h[i] = std::exp(-decay * double(i)) * g(rng); }
  const double tail = h.tail(n - 1).square().sum();
  h.tail(n - 1) *= std::sqrt(std::pow(10.0, -drr_db / 10.0) / tail);
  return {std::move(h), rate};
}

void write_synthetic_corpus(const std::filesystem::path &dir, const SynthSpec &spec)
{
  require(spec.utterances >= 1, "write_synthetic_corpus: need at least one utterance");
  for (Index u = 0; u < spec.utterances; ++u) {
    char name[32];
    std::snprintf(name, sizeof name, "utt_%02ld.wav", long(u + 1));
    write_wav(dir / "speech" / name, speech_like(derive_seed(spec.seed, std::uint64_t(u)), spec.sample_rate, spec.seconds));
  }
  for (double t60 : spec.t60s) {
    char name[32];
    std::snprintf(name, sizeof name, "t60_%.2f.wav", t60);
    write_float(dir / "rir" / name, exponential_rir(t60, spec.sample_rate, spec.seed, spec.drr_db));
  }
  write_wav(dir / "noise" / "white.wav", white_noise(spec.seed, spec.sample_rate, spec.noise_seconds));
  write_wav(dir / "noise" / "babble.wav", babble(spec.seed, spec.sample_rate, spec.noise_seconds));
}

std::vector<std::filesystem::path> list_wavs(const std::filesystem::path &dir)
{
  require(std::filesystem::is_directory(dir), "list_wavs: not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto &e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") { out.push_back(e.path()); }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace nrse::corpus
