// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/hnh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nrse::hnh {

void AbsorptionParams::validate() const
{
  require(min_shift > 0.0, "hnh: S (min_shift) must be > 0");
  require(k > 0.0 && k_prime > 0.0, "hnh: sigmoid growth rates must be > 0");
  require(memory >= 0.0 && memory <= 1.0, "hnh: memory weight p must lie in [0, 1]");
  require(max_gain_nonstationary > 0.0 && max_gain_nonstationary <= 1.0, "hnh: L' must lie in (0, 1]");
  require(gain_floor > 0.0 && gain_floor <= 1.0, "hnh: gain floor must lie in (0, 1]");
  require(f_harm >= 0.0 && f_nonharm >= 0.0 && f_nonharm <= 1.0, "hnh: invalid harmonic factors");
  require(c_harm >= 0.0 && c_nonharm >= 0.0, "hnh: exponents must be >= 0");
  if (forced_absorption) {
    require(*forced_absorption > 0.0 && *forced_absorption <= 1.0, "hnh: forced absorption must lie in (0, 1]");
  }
}

InsConfig Params::default_rg_ins()
{
  InsConfig c;
  c.n_surrogates = 10;
  c.n_positions = 16;
  return c;
}

Framing Params::framing(int sample_rate) const
{
  const Index len = Index(std::lround(frame_ms * 1e-3 * sample_rate));
  const Index hop = std::max<Index>(1, Index(std::lround(double(len) * (1.0 - overlap))));
  return {len, hop, window};
}

void Params::validate() const
{
  require(frame_ms > 0.0, "hnh: frame_ms must be > 0");
  require(overlap >= 0.0 && overlap < 1.0, "hnh: overlap must lie in [0, 1)");
  require(zc_th_ratio > 0.0, "hnh: zc_th_ratio must be > 0");
  require(rg_len >= 2, "hnh: rg_len must be >= 2 frames");
  absorption.validate();
  rg_ins.validate();
}

Classification classify_frames(const FrameSequence &fs, double zc_th, double en_th_db)
{
  require(fs.size() > 0, "classify_frames: empty frame sequence");
  Classification c;
  c.en_max = fs.energy_db.maxCoeff();
  c.en_min = fs.energy_db.minCoeff();
  const double range = c.en_max - c.en_min;
  c.en_th_effective = range > std::abs(en_th_db) ? -0.55 * range : en_th_db;
  c.labels.resize(std::size_t(fs.size()));
  for (Index l = 0; l < fs.size(); ++l) {
    const bool harmonic = fs.zero_crossings[l] < zc_th && fs.energy_db[l] - c.en_max > c.en_th_effective;
    c.labels[std::size_t(l)] = harmonic ? FrameClass::Harmonic : FrameClass::NonHarmonic;
  }
  return c;
}

std::vector<ReverberationGroup> segment_rgs(const FrameSequence &fs, Index rg_len)
{
  require(rg_len >= 2, "segment_rgs: rg_len must be >= 2");
  require(fs.size() >= rg_len, "segment_rgs: fewer frames than one reverberation group");
  std::vector<ReverberationGroup> groups;
  for (Index b = 0, m = 0; b < fs.size(); b += rg_len, ++m) {
    ReverberationGroup g;
    g.index = m;
    g.frame_begin = b;
    g.frame_end = std::min(b + rg_len, fs.size());
    groups.push_back(std::move(g));
  }
  return groups;
}

SampledSignal rg_signal(const SampledSignal &x, const FrameSequence &fs, const ReverberationGroup &g)
{
  const Index begin = fs.span(g.frame_begin).first;
  const Index end = fs.span(g.frame_end - 1).second;
  return {x.samples().segment(begin, end - begin), x.sample_rate()};
}

RealVector rg_ins(const SampledSignal &x, const FrameSequence &fs, const ReverberationGroup &g, const InsConfig &cfg)
{
  const SampledSignal seg = rg_signal(x, fs, g);
  if (seg.size() < 2 * cfg.min_taper_len || seg.samples().abs().maxCoeff() == 0.0) {
    return RealVector::Zero(Index(cfg.scales.size()));
  }
  return compute_ins(seg, cfg).values;
}

double delta_ins(const RealVector &v_m, const RealVector &v_prev)
{
  require(v_m.size() == v_prev.size(), "delta_ins: vectors must have equal length");
  const double denom = v_m.matrix().norm() + v_prev.matrix().norm();
  if (denom == 0.0) { return 0.0; }
  return (v_m - v_prev).matrix().norm() / denom;
}

Deviation deviation_from_string(const std::string &name)
{
  if (name == "group_symmetric") { return Deviation::GroupSymmetric; }
  if (name == "group_position") { return Deviation::GroupPosition; }
  if (name == "utterance_position") { return Deviation::UtterancePosition; }
  throw Error("unknown deviation mode: " + name);
}

std::string to_string(Deviation d)
{
  switch (d) {
  case Deviation::GroupSymmetric: return "group_symmetric";
  case Deviation::GroupPosition: return "group_position";
  case Deviation::UtterancePosition: return "utterance_position";
  }
  return "group_symmetric";
}

RealVector frame_deviation(const FrameSequence &fs, const ReverberationGroup &g, Deviation mode)
{
  const RealVector en = fs.energy_db.segment(g.frame_begin, g.size());
  const RealVector &ref = mode == Deviation::UtterancePosition ? fs.energy_db : en;
  const double lo = ref.minCoeff();
  const double range = ref.maxCoeff() - lo;
  if (range <= 0.0) { return RealVector::Zero(en.size()); }
  if (mode == Deviation::GroupSymmetric) { return ((en - en.mean()).abs() / range).min(1.0); }
  return ((en - lo) / range).max(0.0).min(1.0);
}

double group_level(double delta, double prev_level, const AbsorptionParams &p)
{
  return p.memory * delta + (1.0 - p.memory) * prev_level;
}

double absorption_gain(double d, double delta, double level, const AbsorptionParams &p)
{
  p.validate();
  require(d >= 0.0 && d <= 1.0, "absorption_gain: d must lie in [0, 1]");
  if (p.forced_absorption) { return *p.forced_absorption; }
  double a;
  if (delta <= p.theta_ins) {
    // The level never drops below the shift S, which keeps A nondecreasing in d.
    const double l = std::max(level, p.min_shift);
    const double norm = 1.0 + std::exp(-p.k * (1.0 - p.d0)); // F(l): A = L(m) at d = 1
    a = norm * (l - p.min_shift) / (1.0 + std::exp(-p.k * (d - p.d0))) + p.min_shift;
  } else {
    a = p.max_gain_nonstationary / (1.0 + std::exp(-p.k_prime * (d - p.d0_prime)));
  }
  return std::clamp(a, 1e-9, 1.0);
}

double harmonic_gain(double a, FrameClass cls, double delta, const AbsorptionParams &p)
{
  const double g = cls == FrameClass::Harmonic ? (1.0 + p.f_harm * std::pow(delta, p.c_harm)) * a
                                               : (1.0 - p.f_nonharm * std::pow(delta, p.c_nonharm)) * a;
  return std::clamp(g, p.gain_floor, 1.0);
}

SampledSignal enhance(const SampledSignal &x, const Params &params, std::vector<FrameTrace> *trace)
{
  params.validate();
  require(!x.empty(), "hnh::enhance: empty input");
  const FrameSequence fs = frame_signal(x, params.framing(x.sample_rate()));
  const Classification cls =
      classify_frames(fs, params.zc_th_ratio * double(fs.framing.frame_len), params.en_th_db);
  std::vector<ReverberationGroup> groups = segment_rgs(fs, std::min(params.rg_len, fs.size()));
  const auto &ap = params.absorption;

  RealVector gains(fs.size());
  if (trace) { trace->clear(); }
  double level = 0.0;
  for (std::size_t m = 0; m < groups.size(); ++m) {
    auto &g = groups[m];
    InsConfig ins_cfg = params.rg_ins;
    ins_cfg.seed = derive_seed(params.seed, m);
    g.v_ins = rg_ins(x, fs, g, ins_cfg);
    g.delta = m == 0 ? 0.0 : delta_ins(g.v_ins, groups[m - 1].v_ins);
    // L(0) = delta(1), which is zero by convention.
    level = group_level(g.delta, m == 0 ? g.delta : level, ap);

    const RealVector d = frame_deviation(fs, g, params.deviation);
    for (Index l = g.frame_begin; l < g.frame_end; ++l) {
      const double dl = d[l - g.frame_begin];
      const double a = absorption_gain(dl, g.delta, level, ap);
      const FrameClass c = cls.labels[std::size_t(l)];
      const double ah = harmonic_gain(a, c, g.delta, ap);
      gains[l] = ah;
      if (trace) {
        trace->push_back({l, Index(m), c, fs.zero_crossings[l], fs.energy_db[l], dl, g.delta, level, a, ah});
      }
    }
  }
  return overlap_add(fs, gains);
}

void write_trace_csv(std::ostream &out, const std::vector<FrameTrace> &trace)
{
  out << "frame,group,class,zc,en_db,d,delta,level,a,a_hnh\n";
  for (const auto &t : trace) {
    out << t.frame << ',' << t.group << ',' << (t.cls == FrameClass::Harmonic ? "H" : "N") << ',' << t.zc << ','
        << t.en_db << ',' << t.d << ',' << t.delta << ',' << t.level << ',' << t.a << ',' << t.a_hnh << '\n';
  }
}

} // namespace nrse::hnh
