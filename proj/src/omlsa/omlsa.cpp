// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/omlsa.hpp"

#include <cmath>
#include <deque>

namespace nrse::omlsa {

namespace {

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

// Running minimum over the last `len` rows, per column.
RealMatrix sliding_min(const RealMatrix &s, Index len)
{
  RealMatrix out(s.rows(), s.cols());
  for (Index k = 0; k < s.cols(); ++k) {
    std::deque<Index> q; // indices with increasing values
    for (Index l = 0; l < s.rows(); ++l) {
      while (!q.empty() && s(q.back(), k) >= s(l, k)) { q.pop_back(); }
      q.push_back(l);
      if (q.front() <= l - len) { q.pop_front(); }
      out(l, k) = s(q.front(), k);
    }
  }
  return out;
}

} // namespace

void NoiseTrackerConfig::validate() const
{
  require(smoothing >= 0.0 && smoothing < 1.0, "NoiseTrackerConfig: smoothing must lie in [0, 1)");
  require(window_s > 0.0, "NoiseTrackerConfig: window must be positive");
  require(bias >= 1.0, "NoiseTrackerConfig: bias compensation must be >= 1");
  require(speech_ratio > 1.0, "NoiseTrackerConfig: speech ratio must exceed 1");
  require(floor > 0.0, "NoiseTrackerConfig: floor must be positive");
}

void LsaConfig::validate() const
{
  require(0.0 <= q1 && q1 <= q0 && q0 <= 1.0, "LsaConfig: need 0 <= Q1 <= Q0 <= 1");
  require(g1_db >= g0_db, "LsaConfig: need G1 >= G0");
  require(g1_db <= 0.0, "LsaConfig: gain floors must not exceed 0 dB");
  require(dd_alpha > 0.0 && dd_alpha < 1.0, "LsaConfig: dd_alpha must lie in (0, 1)");
  require(std::isfinite(xi_min_db), "LsaConfig: xi_min_db must be finite");
  tracker.validate();
}

double exp_int_e1(double v)
{
  require(v > 0.0, "exp_int_e1: argument must be positive");
  return -std::expint(-v);
}

double lsa_gain(double xi, double gamma)
{
  require(xi >= 0.0 && std::isfinite(xi) && std::isfinite(gamma), "lsa_gain: invalid SNR");
  const double r = xi / (1.0 + xi);
  const double v = std::max(r * gamma, 1e-10);
  return r * std::exp(0.5 * exp_int_e1(v));
}

double combined_gain(double g_h1, double p, double g_min)
{
  return std::pow(g_h1, p) * std::pow(g_min, 1.0 - p);
}

UnitParams irmo_params(std::uint8_t bit, const LsaConfig &cfg)
{
  require(bit <= 1, "irmo_params: mask bit must be 0 or 1");
  return bit ? UnitParams{cfg.q1, db_to_amplitude(cfg.g1_db)} : UnitParams{cfg.q0, db_to_amplitude(cfg.g0_db)};
}

double unit_gain(double xi, double gamma, const UnitParams &u)
{
  const double g_h1 = std::clamp(lsa_gain(xi, gamma), u.g_min, 1.0);
  return std::min(combined_gain(g_h1, 1.0 - u.q, u.g_min), 1.0);
}

RealMatrix track_noise_psd(const RealMatrix &power, double frame_rate, const NoiseTrackerConfig &cfg)
{
  cfg.validate();
  require(frame_rate > 0.0, "track_noise_psd: frame rate must be positive");
  const Index len = std::max<Index>(1, Index(std::llround(cfg.window_s * frame_rate)));
  const double a = cfg.smoothing;

  auto smooth = [&](const auto &keep) {
    RealMatrix s(power.rows(), power.cols());
    for (Index l = 0; l < power.rows(); ++l) {
      for (Index k = 0; k < power.cols(); ++k) {
        const double prev = l > 0 ? s(l - 1, k) : power(0, k);
        s(l, k) = keep(l, k) ? a * prev + (1.0 - a) * power(l, k) : prev;
      }
    }
    return s;
  };

  const RealMatrix first = (cfg.bias * sliding_min(smooth([](Index, Index) { return true; }), len)).max(cfg.floor);
  // Second pass: bins judged speech-dominant hold the previous smoothed value.
  const RealMatrix second =
      smooth([&](Index l, Index k) { return l == 0 || power(l, k) < cfg.speech_ratio * first(l, k); });
  return (cfg.bias * sliding_min(second, len)).max(cfg.floor);
}

SampledSignal irmo_enhance(const SampledSignal &x, const mask::TFMask &irm, const Framing &framing,
                           const LsaConfig &cfg, RealMatrix *gains)
{
  cfg.validate();
  TFGrid g = stft(x, framing);
  require(g.frames() == irm.frames(), "irmo_enhance: mask frame count does not match the STFT");
  require(irm.bands() == irm.layout.bands(), "irmo_enhance: mask band count does not match its layout");
  const Eigen::ArrayXi map = irm.layout.bin_bands(g.nfft, g.sample_rate);

  const RealMatrix power = g.power();
  const RealMatrix noise = track_noise_psd(power, double(x.sample_rate()) / double(framing.hop), cfg.tracker);
  const double xi_min = std::pow(10.0, cfg.xi_min_db / 10.0);
  const UnitParams on = irmo_params(1, cfg), off = irmo_params(0, cfg);

  RealMatrix gmat(g.frames(), g.bins());
  RealVector prev_amp2 = RealVector::Zero(g.bins()); // |X_hat|^2 / lambda of the previous frame
  for (Index l = 0; l < g.frames(); ++l) {
    for (Index k = 0; k < g.bins(); ++k) {
      const double gamma = power(l, k) / noise(l, k);
      const double ml = std::max(gamma - 1.0, 0.0);
      const double xi = std::max(l == 0 ? ml : cfg.dd_alpha * prev_amp2[k] + (1.0 - cfg.dd_alpha) * ml, xi_min);
      const double g_h1 = std::min(lsa_gain(xi, gamma), 1.0);
      prev_amp2[k] = g_h1 * g_h1 * gamma;
      const bool keep = map[k] < 0 || irm.bits(l, map[k]) != 0;
      gmat(l, k) = unit_gain(xi, gamma, keep ? on : off);
    }
  }
  g.values *= gmat.cast<Cx>();
  if (gains) { *gains = std::move(gmat); }
  return istft(g);
}

} // namespace nrse::omlsa
