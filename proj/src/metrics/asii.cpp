// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/metrics.hpp"
#include "nrse/stft.hpp"

namespace nrse::metrics {

namespace {

// Critical-band procedure: centers, limits and importance.
constexpr double kCenters[21] = {150,  250,  350,  450,  570,  700,  840,  1000, 1170, 1370, 1600,
                                 1850, 2150, 2500, 2900, 3400, 4000, 4800, 5800, 7000, 8500};
constexpr double kLower[21] = {100,  200,  300,  400,  510,  630,  770,  920,  1080, 1270, 1480,
                               1720, 2000, 2320, 2700, 3150, 3700, 4400, 5300, 6400, 7700};
constexpr double kUpper[21] = {200,  300,  400,  510,  630,  770,  920,  1080, 1270, 1480, 1720,
                               2000, 2320, 2700, 3150, 3700, 4400, 5300, 6400, 7700, 9500};
constexpr double kImportance[21] = {0.0103, 0.0261, 0.0419, 0.0577, 0.0577, 0.0577, 0.0577,
                                    0.0577, 0.0577, 0.0577, 0.0577, 0.0577, 0.0577, 0.0577,
                                    0.0577, 0.0577, 0.0577, 0.0460, 0.0343, 0.0226, 0.0110};

constexpr double kDynRange = 40.0;

} // namespace

CriticalBands CriticalBands::ansi_s35(int sample_rate)
{
  require(sample_rate > 0, "CriticalBands: sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  Index n = 0;
  while (n < 21 && kLower[n] < nyquist) { ++n; }
  require(n > 0, "CriticalBands: sample rate too low");
  CriticalBands b;
  b.center_hz.resize(n);
  b.lower_hz.resize(n);
  b.upper_hz.resize(n);
  b.weight.resize(n);
  for (Index j = 0; j < n; ++j) {
    b.center_hz[j] = kCenters[j];
    b.lower_hz[j] = kLower[j];
    b.upper_hz[j] = std::min(kUpper[j], nyquist);
    b.weight[j] = kImportance[j];
  }
  b.weight /= b.weight.sum();
  return b;
}

double asii_from_snr(const RealMatrix &xi, const RealVector &weights)
{
  require(xi.rows() == weights.size(), "asii: band count does not match the weights");
  require(xi.cols() > 0, "asii: no frames");
  require((weights >= 0.0).all() && std::abs(weights.sum() - 1.0) < 1e-9, "asii: weights must sum to 1");
  double total = 0.0;
  for (Index l = 0; l < xi.cols(); ++l) {
    for (Index j = 0; j < xi.rows(); ++j) {
      const double s = xi(j, l);
      require(s >= 0.0, "asii: negative SNR");
      total += weights[j] * (std::isinf(s) ? 1.0 : s / (s + 1.0));
    }
  }
  return total / double(xi.cols());
}

double asii_st(const SampledSignal &clean, const SampledSignal &processed)
{
  require(clean.size() == processed.size(), "asii_st: clean and processed lengths differ");
  require(clean.sample_rate() == processed.sample_rate(), "asii_st: sample rates differ");
  require(clean.samples().abs().maxCoeff() > 0.0, "asii_st: clean signal is silent");

  const int rate = clean.sample_rate();
  const Framing fr = Framing::speech_default(rate);
  const SampledSignal residual(processed.samples() - clean.samples(), rate);
  const TFGrid gc = stft(clean, fr), gr = stft(residual, fr);
  const RealMatrix pc = gc.power(), pr = gr.power();
  const CriticalBands cb = CriticalBands::ansi_s35(rate);

  RealVector frame_db(gc.frames());
  for (Index l = 0; l < gc.frames(); ++l) { frame_db[l] = 10.0 * std::log10(pc.row(l).sum() + 1e-300); }
  const double top = frame_db.maxCoeff();
  std::vector<Index> speech;
  for (Index l = 0; l < gc.frames(); ++l) {
    if (frame_db[l] > top - kDynRange) { speech.push_back(l); }
  }

  RealMatrix xi(cb.size(), Index(speech.size()));
  for (Index j = 0; j < cb.size(); ++j) {
    for (std::size_t i = 0; i < speech.size(); ++i) {
      double ec = 0.0, er = 0.0;
      for (Index k = 0; k < gc.bins(); ++k) {
        const double f = gc.bin_hz(k);
        if (f >= cb.lower_hz[j] && f < cb.upper_hz[j]) {
          ec += pc(speech[i], k);
          er += pr(speech[i], k);
        }
      }
      xi(j, Index(i)) = er > 0.0 ? ec / er : (ec > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }
  }
  return asii_from_snr(xi, cb.weight);
}

} // namespace nrse::metrics
