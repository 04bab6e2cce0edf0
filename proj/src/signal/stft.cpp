// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/stft.hpp"

#include "nrse/fft.hpp"

namespace nrse {

void TFGrid::validate() const
{
  framing.validate();
  require(nfft >= framing.frame_len, "TFGrid: nfft smaller than frame length");
  require(values.cols() == nfft / 2 + 1, "TFGrid: bin count does not match nfft");
  require(values.rows() == framing.frame_count(signal_length), "TFGrid: frame count does not match signal length");
  require(sample_rate > 0, "TFGrid: sample rate must be positive");
}

TFGrid stft(const SampledSignal &x, const Framing &framing, Index nfft)
{
  framing.validate();
  require(x.size() >= framing.frame_len, "stft: signal shorter than one frame");
  if (nfft == 0) { nfft = framing.frame_len; }
  require(nfft >= framing.frame_len, "stft: nfft smaller than frame length");

  const Index len = framing.frame_len;
  const Index count = framing.frame_count(x.size());
  const RealVector w = make_window(framing.window, len);

  TFGrid g;
  g.framing = framing;
  g.nfft = nfft;
  g.signal_length = x.size();
  g.sample_rate = x.sample_rate();
  g.values.resize(count, nfft / 2 + 1);

  RealVector buf(nfft);
  for (Index l = 0; l < count; ++l) {
    const Index b = l * framing.hop;
    const Index n = std::min(len, x.size() - b);
    buf.setZero();
    buf.head(n) = x.samples().segment(b, n) * w.head(n);
    g.values.row(l) = fft::forward(buf).transpose();
  }
  return g;
}

SampledSignal istft(const TFGrid &g)
{
  g.validate();
  const Index len = g.framing.frame_len;
  const Index hop = g.framing.hop;
  const RealVector w = make_window(g.framing.window, len);
  const Index padded = (g.frames() - 1) * hop + len;

  RealVector acc = RealVector::Zero(padded);
  RealVector norm = RealVector::Zero(padded);
  for (Index l = 0; l < g.frames(); ++l) {
    const RealVector frame = fft::inverse(g.values.row(l).transpose(), g.nfft);
    acc.segment(l * hop, len) += frame.head(len) * w;
    norm.segment(l * hop, len) += w.square();
  }
  RealVector y = (acc / norm.max(1e-300)).head(g.signal_length);
  return {std::move(y), g.sample_rate};
}

} // namespace nrse
