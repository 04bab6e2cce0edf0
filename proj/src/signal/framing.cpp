// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/framing.hpp"

#include <cmath>
#include <numbers>

namespace nrse {

WindowKind window_from_string(const std::string &name)
{
  if (name == "hamming") { return WindowKind::Hamming; }
  if (name == "hann" || name == "hanning") { return WindowKind::Hann; }
  if (name == "rect" || name == "rectangular") { return WindowKind::Rectangular; }
  throw Error("unknown window: " + name);
}

std::string to_string(WindowKind w)
{
  switch (w) {
  case WindowKind::Hamming: return "hamming";
  case WindowKind::Hann: return "hann";
  default: return "rectangular";
  }
}

RealVector make_window(WindowKind kind, Index len)
{
  require(len >= 1, "make_window: length must be positive");
  if (kind == WindowKind::Rectangular) { return RealVector::Ones(len); }
  const double a = kind == WindowKind::Hamming ? 0.54 : 0.5;
  // Hann is sampled half a sample off the grid so no tap is zero and every sample survives analysis.
  const double shift = kind == WindowKind::Hann ? 0.5 : 0.0;
  RealVector w(len);
  for (Index n = 0; n < len; ++n) {
    w[n] = a - (1.0 - a) * std::cos(2.0 * std::numbers::pi * (double(n) + shift) / double(len));
  }
  return w;
}

Framing Framing::speech_default(int sample_rate)
{
  const Index len = Index(std::lround(0.032 * sample_rate));
  return {len, len / 2, WindowKind::Hamming};
}

Framing Framing::non_overlapping(int sample_rate, double ms)
{
  const Index len = Index(std::lround(ms * 1e-3 * sample_rate));
  return {len, len, WindowKind::Rectangular};
}

void Framing::validate() const
{
  require(frame_len >= 2, "framing: frame_len must be >= 2");
  require(hop > 0 && hop <= frame_len, "framing: hop must be in (0, frame_len]");
}

Index Framing::frame_count(Index n) const
{
  if (n < frame_len) { return 0; }
  return 1 + (n - frame_len + hop - 1) / hop;
}

std::pair<Index, Index> FrameSequence::span(Index l) const
{
  const Index b = l * framing.hop;
  return {b, std::min(b + framing.frame_len, signal_length)};
}

FrameSequence frame_signal(const SampledSignal &x, const Framing &framing)
{
  framing.validate();
  require(x.size() >= framing.frame_len, "frame_signal: signal shorter than one frame");
  const Index count = framing.frame_count(x.size());
  const Index len = framing.frame_len;

  FrameSequence fs;
  fs.framing = framing;
  fs.signal_length = x.size();
  fs.sample_rate = x.sample_rate();
  fs.window = make_window(framing.window, len);
  fs.frames.resize(count, len);
  fs.energy_db.resize(count);
  fs.zero_crossings.resize(count);

  RealVector raw(len);
  for (Index l = 0; l < count; ++l) {
    const Index b = l * framing.hop;
    const Index n = std::min(len, x.size() - b);
    raw.setZero();
    raw.head(n) = x.samples().segment(b, n);
    fs.energy_db[l] = frame_energy_db(raw);
    fs.zero_crossings[l] = zero_crossings(raw.head(n));
    fs.frames.row(l) = (raw * fs.window).transpose();
  }
  return fs;
}

SampledSignal overlap_add(const FrameSequence &fs, const RealVector &gains)
{
  require(gains.size() == fs.size(), "overlap_add: gains length must equal frame count");
  const Index len = fs.framing.frame_len;
  const Index padded = (fs.size() - 1) * fs.framing.hop + len;
  RealVector acc = RealVector::Zero(padded);
  RealVector norm = RealVector::Zero(padded);
  for (Index l = 0; l < fs.size(); ++l) {
    const Index b = l * fs.framing.hop;
    acc.segment(b, len) += gains[l] * fs.frames.row(l).transpose();
    norm.segment(b, len) += fs.window;
  }
  RealVector y = (acc / norm.max(1e-300)).head(fs.signal_length);
  return {std::move(y), fs.sample_rate};
}

SampledSignal overlap_add(const FrameSequence &fs)
{
  return overlap_add(fs, RealVector::Ones(fs.size()));
}

} // namespace nrse
