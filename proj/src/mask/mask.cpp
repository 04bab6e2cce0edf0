// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/mask.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "nrse/mixing.hpp"

namespace nrse::mask {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

BandLayout BandLayout::mel(Index bands, int sample_rate, double f_lo, double f_hi)
{
  require(bands >= 1, "BandLayout: need at least one band");
  require(sample_rate > 0, "BandLayout: sample rate must be positive");
  if (f_hi <= 0.0) { f_hi = sample_rate / 2.0; }
  require(f_lo >= 0.0 && f_lo < f_hi && f_hi <= sample_rate / 2.0, "BandLayout: invalid frequency range");
  const double m0 = hz_to_mel(f_lo), m1 = hz_to_mel(f_hi);
  BandLayout out;
  out.edges_hz.resize(bands + 1);
  for (Index j = 0; j <= bands; ++j) { out.edges_hz[j] = mel_to_hz(m0 + (m1 - m0) * double(j) / double(bands)); }
  out.edges_hz[0] = f_lo;
  out.edges_hz[bands] = f_hi;
  return out;
}

void BandLayout::validate(int sample_rate) const
{
  require(edges_hz.size() >= 2, "BandLayout: need at least two edges");
  require(edges_hz[0] >= 0.0 && edges_hz[bands()] <= sample_rate / 2.0 + 1e-9, "BandLayout: edges outside [0, fs/2]");
  for (Index j = 0; j < bands(); ++j) {
    require(edges_hz[j + 1] > edges_hz[j], "BandLayout: edges must be strictly increasing");
  }
}

Eigen::ArrayXi BandLayout::bin_bands(Index nfft, int sample_rate) const
{
  validate(sample_rate);
  const Index bins = nfft / 2 + 1;
  Eigen::ArrayXi map = Eigen::ArrayXi::Constant(bins, -1);
  Eigen::ArrayXi owned = Eigen::ArrayXi::Zero(bands());
  Index j = 0;
  for (Index k = 0; k < bins; ++k) {
    const double f = double(k) * sample_rate / double(nfft);
    if (f < edges_hz[0]) { continue; }
    while (j < bands() && f >= edges_hz[j + 1] && !(j == bands() - 1 && f <= edges_hz[j + 1])) { ++j; }
    if (j == bands()) { break; }
    map[k] = int(j);
    ++owned[j];
  }
  require((owned > 0).all(), "BandLayout: a band contains no STFT bin; use fewer bands or a longer frame");
  return map;
}

double TFMask::row_fraction(Index l) const
{
  require(l >= 0 && l < frames(), "TFMask: frame index out of range");
  return bits.row(l).cast<double>().sum() / double(bands());
}

RealMatrix band_energies(const TFGrid &grid, const BandLayout &layout)
{
  const Eigen::ArrayXi map = layout.bin_bands(grid.nfft, grid.sample_rate);
  const RealMatrix p = grid.power();
  RealMatrix e = RealMatrix::Zero(grid.frames(), layout.bands());
  for (Index k = 0; k < map.size(); ++k) {
    if (map[k] >= 0) { e.col(map[k]) += p.col(k); }
  }
  return e;
}

RealMatrix srr(const SampledSignal &direct, const SampledSignal &mixture, const BandLayout &layout,
               const Framing &framing)
{
  require(direct.size() == mixture.size(), "srr: direct and mixture lengths differ");
  require(direct.sample_rate() == mixture.sample_rate(), "srr: sample rates differ");
  const SampledSignal residual(mixture.samples() - direct.samples(), mixture.sample_rate());
  const RealMatrix ed = band_energies(stft(direct, framing), layout);
  const RealMatrix er = band_energies(stft(residual, framing), layout);

  // eps sits far below any audible unit but keeps silent units finite.
  constexpr double eps = 1e-20;
  RealMatrix out(ed.rows(), ed.cols());
  for (Index l = 0; l < out.rows(); ++l) {
    for (Index j = 0; j < out.cols(); ++j) {
      const double d = ed(l, j), r = er(l, j);
      double v;
      if (d <= 0.0) {
        v = -kSrrCapDb;
      } else {
        v = 10.0 * std::log10(d / (r + eps));
      }
      out(l, j) = std::clamp(v, -kSrrCapDb, kSrrCapDb);
    }
  }
  return out;
}

TFMask irm(const RealMatrix &srr_db, const BandLayout &layout, double theta_db)
{
  require(srr_db.cols() == layout.bands(), "irm: SRR band count does not match the layout");
  require(std::isfinite(theta_db), "irm: threshold must be finite");
  TFMask m;
  m.theta_db = theta_db;
  m.layout = layout;
  m.bits = (srr_db > theta_db).cast<std::uint8_t>();
  return m;
}

SampledSignal apply_mask(const SampledSignal &x, const TFMask &mask, const Framing &framing)
{
  TFGrid g = stft(x, framing);
  require(g.frames() == mask.frames(), "apply_mask: mask frame count does not match the signal");
  require(mask.bands() == mask.layout.bands(), "apply_mask: mask band count does not match its layout");
  const Eigen::ArrayXi map = mask.layout.bin_bands(g.nfft, g.sample_rate);
  for (Index l = 0; l < g.frames(); ++l) {
    for (Index k = 0; k < g.bins(); ++k) {
      // Bins outside the layout are left untouched.
      if (map[k] >= 0 && mask.bits(l, map[k]) == 0) { g.values(l, k) = 0.0; }
    }
  }
  return istft(g);
}

SampledSignal direct_reference(const SampledSignal &clean, const SampledSignal &rir, double early_ms)
{
  require(early_ms >= 0.0, "direct_reference: early window must be non-negative");
  require(!rir.empty(), "direct_reference: empty RIR");
  Index peak;
  rir.samples().abs().maxCoeff(&peak);
  const Index keep = std::min(rir.size(), peak + 1 + Index(std::llround(early_ms * 1e-3 * rir.sample_rate())));
  const SampledSignal early = convolve_rir(clean, rir.head(keep));
  return early.head(clean.size());
}

void OracleConfig::validate() const
{
  require(bands >= 1, "OracleConfig: bands must be positive");
  require(std::isfinite(theta_db), "OracleConfig: threshold must be finite");
  require(early_ms >= 0.0, "OracleConfig: early window must be non-negative");
}

Framing oracle_framing(const OracleConfig &cfg, int sample_rate)
{
  return cfg.framing.frame_len > 0 ? cfg.framing : Framing::speech_default(sample_rate);
}

TFMask oracle_irm(const SampledSignal &clean, const SampledSignal &rir, const SampledSignal &mixture,
                  const OracleConfig &cfg)
{
  cfg.validate();
  require(clean.size() == mixture.size(), "oracle_irm: clean and mixture lengths differ");
  const SampledSignal direct = direct_reference(clean, rir, cfg.early_ms);
  const BandLayout layout = BandLayout::mel(cfg.bands, clean.sample_rate());
  return irm(srr(direct, mixture, layout, oracle_framing(cfg, clean.sample_rate())), layout, cfg.theta_db);
}

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'R', 'S', 'E', 'M', 'S', 'K', '1'};

void put_u32(std::ostream &os, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) { os.put(char((v >> (8 * i)) & 0xFF)); }
}

void put_f64(std::ostream &os, double d)
{
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  for (int i = 0; i < 8; ++i) { os.put(char((v >> (8 * i)) & 0xFF)); }
}

std::uint64_t get_le(std::istream &is, int bytes)
{
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    require(c != EOF, "load_mask: truncated file");
    v |= std::uint64_t(std::uint8_t(c)) << (8 * i);
  }
  return v;
}

double get_f64(std::istream &is)
{
  const std::uint64_t v = get_le(is, 8);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

} // namespace

void save_mask(const std::filesystem::path &path, const TFMask &mask)
{
  require(mask.bands() == mask.layout.bands(), "save_mask: band count does not match the layout");
  if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
  std::ofstream os(path, std::ios::binary);
  require(bool(os), "save_mask: cannot open " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, std::uint32_t(mask.bands()));
  put_u32(os, std::uint32_t(mask.frames()));
  put_f64(os, mask.theta_db);
  for (Index j = 0; j < mask.layout.edges_hz.size(); ++j) { put_f64(os, mask.layout.edges_hz[j]); }
  const Index total = mask.frames() * mask.bands();
  std::uint8_t byte = 0;
  for (Index i = 0; i < total; ++i) {
    if (mask.bits(i / mask.bands(), i % mask.bands())) { byte |= std::uint8_t(1u << (i % 8)); }
    if (i % 8 == 7 || i == total - 1) {
      os.put(char(byte));
      byte = 0;
    }
  }
  require(bool(os), "save_mask: write failed for " + path.string());
}

TFMask load_mask(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "load_mask: cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  require(bool(is) && magic == kMagic, "load_mask: not a mask file: " + path.string());
  const auto bands = Index(get_le(is, 4));
  const auto frames = Index(get_le(is, 4));
  require(bands >= 1 && bands < (1 << 16) && frames < (Index(1) << 31), "load_mask: implausible dimensions");
  TFMask m;
  m.theta_db = get_f64(is);
  m.layout.edges_hz.resize(bands + 1);
  for (Index j = 0; j <= bands; ++j) { m.layout.edges_hz[j] = get_f64(is); }
  m.bits = BitMatrix::Zero(frames, bands);
  const Index total = frames * bands;
  int byte = 0;
  for (Index i = 0; i < total; ++i) {
    if (i % 8 == 0) { byte = int(get_le(is, 1)); }
    m.bits(i / bands, i % bands) = std::uint8_t((byte >> (i % 8)) & 1);
  }
  return m;
}

} // namespace nrse::mask
