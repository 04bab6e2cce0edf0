// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>

#include "nrse/stft.hpp"

namespace nrse::mask {

// Contiguous frequency bands over the STFT bins; J bands need J + 1 edges.
struct BandLayout
{
  RealVector edges_hz;

  Index bands() const { return edges_hz.size() - 1; }
  // Mel-spaced edges from f_lo to f_hi (f_hi <= 0 means Nyquist).
  static BandLayout mel(Index bands, int sample_rate, double f_lo = 0.0, double f_hi = 0.0);
  void validate(int sample_rate) const;
  // Band index of each of the nfft/2 + 1 bins, -1 outside the layout. Every
  // band must own at least one bin.
  Eigen::ArrayXi bin_bands(Index nfft, int sample_rate) const;
  bool operator==(const BandLayout &o) const
  {
    return edges_hz.size() == o.edges_hz.size() && (edges_hz == o.edges_hz).all();
  }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

using BitMatrix = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TFMask
{
  BitMatrix bits; // frames x bands
  double theta_db = -6.0;
  BandLayout layout;

  Index frames() const { return bits.rows(); }
  Index bands() const { return bits.cols(); }
  // Fraction of ones in frame l.
  double row_fraction(Index l) const;
};

constexpr double kSrrCapDb = 100.0;

// Band energies, frames x bands.
RealMatrix band_energies(const TFGrid &grid, const BandLayout &layout);

// 10 log10(E_direct / (E_residual + eps)) per unit, residual = mixture - direct,
// clipped to +-100 dB.
RealMatrix srr(const SampledSignal &direct, const SampledSignal &mixture, const BandLayout &layout,
               const Framing &framing);

// Bit is 1 iff srr > theta_db.
TFMask irm(const RealMatrix &srr_db, const BandLayout &layout, double theta_db = -6.0);

// STFT, zero the bins of masked-out units, least-squares ISTFT.
SampledSignal apply_mask(const SampledSignal &x, const TFMask &mask, const Framing &framing);

// Clean speech through the RIR truncated early_ms after its peak, cut to the
// clean length.
SampledSignal direct_reference(const SampledSignal &clean, const SampledSignal &rir, double early_ms = 50.0);

struct OracleConfig
{
  Index bands = 21;
  double theta_db = -6.0;
  double early_ms = 50.0;
  Framing framing; // frame_len 0 means 32 ms / 50% Hamming at the signal rate
  void validate() const;
};

// IRM of `mixture` against the early part of clean * rir. Pass the noise-free
// reverberant signal as `mixture` to exclude noise from the residual.
TFMask oracle_irm(const SampledSignal &clean, const SampledSignal &rir, const SampledSignal &mixture,
                  const OracleConfig &cfg = {});
Framing oracle_framing(const OracleConfig &cfg, int sample_rate);

// Binary format: "NRSEMSK1", u32 J, u32 L, f64 theta_db, (J + 1) f64 edges,
// then ceil(L J / 8) bytes of row-major bits, LSB first. Little-endian.
void save_mask(const std::filesystem::path &path, const TFMask &mask);
TFMask load_mask(const std::filesystem::path &path);

} // namespace nrse::mask
