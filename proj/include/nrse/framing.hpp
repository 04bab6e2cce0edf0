// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "nrse/signal.hpp"

namespace nrse {

enum class WindowKind
{
  Rectangular,
  Hamming,
  Hann
};

WindowKind window_from_string(const std::string &name);
std::string to_string(WindowKind w);

// Periodic windows, so Hamming/Hann at 50% hop overlap-add to a constant.
RealVector make_window(WindowKind kind, Index len);

struct Framing
{
  Index frame_len = 512;
  Index hop = 256;
  WindowKind window = WindowKind::Hamming;

  // 32 ms / 50% Hamming at the given rate.
  static Framing speech_default(int sample_rate);
  // Non-overlapping rectangular frames of `ms` milliseconds.
  static Framing non_overlapping(int sample_rate, double ms);

  void validate() const;
  // Frames needed to cover n samples; the tail frame is zero-padded.
  Index frame_count(Index n) const;
  bool operator==(const Framing &) const = default;
};

// Analysis frames with per-frame statistics. Frames are stored windowed; the
// statistics are taken on the unwindowed samples.
struct FrameSequence
{
  RealMatrix frames;         // frame_count x frame_len, windowed
  RealVector window;         // analysis window used
  RealVector energy_db;      // EN(l) = 10 log10(sum x^2 + eps)
  Eigen::ArrayXi zero_crossings; // ZC(l)
  Framing framing;
  Index signal_length = 0;
  int sample_rate = 0;

  Index size() const { return frames.rows(); }
  // Sample range [begin, end) of frame l in the original signal, clipped to its length.
  std::pair<Index, Index> span(Index l) const;
};

constexpr double kEnergyFloor = 1e-12;

template <typename Derived>
double frame_energy_db(const Eigen::ArrayBase<Derived> &x, double eps = kEnergyFloor)
{
  return 10.0 * std::log10(x.square().sum() + eps);
}

// Sign changes between consecutive samples; zero counts as non-negative.
template <typename Derived>
int zero_crossings(const Eigen::ArrayBase<Derived> &x)
{
  int n = 0;
  for (Index i = 1; i < x.size(); ++i) {
    n += (x[i - 1] >= 0.0) != (x[i] >= 0.0);
  }
  return n;
}

FrameSequence frame_signal(const SampledSignal &x, const Framing &framing);

// Weighted overlap-add: y(n) = sum_l g_l f_l(n) / sum_l w(n - l hop). With unit
// gains this reproduces the framed signal exactly.
SampledSignal overlap_add(const FrameSequence &frames, const RealVector &gains);
SampledSignal overlap_add(const FrameSequence &frames);

} // namespace nrse
