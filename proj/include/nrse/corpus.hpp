// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nrse/signal.hpp"

namespace nrse::corpus {

// Syllabic harmonic complex with formant shaping, fricative bursts and
// pauses; leading and trailing silence. Peak 0.5.
SampledSignal speech_like(std::uint64_t seed, int sample_rate = 16000, double seconds = 3.0);

// Sum of independent speech-like talkers, RMS 0.1.
SampledSignal babble(std::uint64_t seed, int sample_rate = 16000, double seconds = 10.0, int talkers = 6);

// Gaussian white noise, RMS 0.1.
SampledSignal white_noise(std::uint64_t seed, int sample_rate = 16000, double seconds = 10.0);

// Unit direct impulse at index 0 followed by an exponentially decaying
// Gaussian tail (60 dB over t60) whose energy is drr_db below the direct path.
SampledSignal exponential_rir(double t60, int sample_rate = 16000, std::uint64_t seed = 1, double drr_db = 0.0);

struct SynthSpec
{
  Index utterances = 20;
  double seconds = 3.0;
  int sample_rate = 16000;
  std::uint64_t seed = 2026;
  std::vector<double> t60s{0.79, 1.1};
  double noise_seconds = 10.0;
  double drr_db = 0.0;
};

// Writes speech/utt_NN.wav, rir/t60_X.XX.wav, noise/{white,babble}.wav under dir.
void write_synthetic_corpus(const std::filesystem::path &dir, const SynthSpec &spec = {});

// Regular *.wav files in dir, sorted by name.
std::vector<std::filesystem::path> list_wavs(const std::filesystem::path &dir);

} // namespace nrse::corpus
