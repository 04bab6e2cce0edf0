// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nrse/framing.hpp"
#include "nrse/ins.hpp"

namespace nrse::hnh {

enum class FrameClass : std::uint8_t
{
  Harmonic,
  NonHarmonic
};

struct Classification
{
  std::vector<FrameClass> labels;
  double en_max = 0.0;
  double en_min = 0.0;
  double en_th_effective = 0.0; // after the low-SNR update
};

// A block of consecutive frames [frame_begin, frame_end).
struct ReverberationGroup
{
  Index index = 0;
  Index frame_begin = 0;
  Index frame_end = 0;
  RealVector v_ins;
  double delta = 0.0;

  Index size() const { return frame_end - frame_begin; }
};

struct AbsorptionParams
{
  double theta_ins = 0.0;
  double k = 10.0;
  double k_prime = 10.0;
  double d0 = 0.3;
  double d0_prime = 0.3;
  double min_shift = 0.3; // S
  double max_gain_nonstationary = 1.0; // L'
  double memory = 0.7; // p, weight of the current group
  double f_harm = 1.1;
  double f_nonharm = 0.7;
  double c_harm = 0.2;
  double c_nonharm = 0.1;
  double gain_floor = 0.05;
  // Bypasses the absorption law with a fixed A when set.
  std::optional<double> forced_absorption;

  void validate() const;
};

// How d(l) places a frame's energy on [0, 1].
enum class Deviation
{
  GroupSymmetric,   // |EN - mean_RG| / range_RG
  GroupPosition,    // (EN - min_RG) / range_RG
  UtterancePosition // (EN - EN_min) / (EN_max - EN_min) over the whole signal
};

Deviation deviation_from_string(const std::string &name);
std::string to_string(Deviation d);

struct Params
{
  double frame_ms = 32.0;
  double overlap = 0.5;
  WindowKind window = WindowKind::Hamming;
  double zc_th_ratio = 0.5; // zc_th = ratio * frame_len crossings
  double en_th_db = -30.0;
  Index rg_len = 8;
  Deviation deviation = Deviation::UtterancePosition;
  AbsorptionParams absorption;
  InsConfig rg_ins = default_rg_ins();
  std::uint64_t seed = 0;

  static InsConfig default_rg_ins();
  Framing framing(int sample_rate) const;
  void validate() const;
};

// Harmonic iff ZC(l) < zc_th and EN(l) - EN_max > en_th (after the low-SNR update).
Classification classify_frames(const FrameSequence &frames, double zc_th, double en_th_db);

std::vector<ReverberationGroup> segment_rgs(const FrameSequence &frames, Index rg_len);

// Samples covered by the group's frames.
SampledSignal rg_signal(const SampledSignal &x, const FrameSequence &frames, const ReverberationGroup &g);

// INS vector of a group; all-zero groups map to the zero vector.
RealVector rg_ins(const SampledSignal &x, const FrameSequence &frames, const ReverberationGroup &g,
                  const InsConfig &cfg);

// ||v_m - v_prev|| / (||v_m|| + ||v_prev||); zero when both vanish.
double delta_ins(const RealVector &v_m, const RealVector &v_prev);

// Per-frame normalized deviation d(l) in [0, 1] of the group's frame energies.
RealVector frame_deviation(const FrameSequence &frames, const ReverberationGroup &g,
                           Deviation mode = Deviation::GroupSymmetric);

// L(m) = p delta + (1 - p) L(m-1).
double group_level(double delta, double prev_level, const AbsorptionParams &p);

// Adaptive absorption A(m, l) for one frame, clamped to (0, 1].
double absorption_gain(double d, double delta, double level, const AbsorptionParams &p);

// Harmonic-aware gain A_HnH, clamped to [gain_floor, 1].
double harmonic_gain(double a, FrameClass cls, double delta, const AbsorptionParams &p);

struct FrameTrace
{
  Index frame = 0;
  Index group = 0;
  FrameClass cls = FrameClass::NonHarmonic;
  int zc = 0;
  double en_db = 0.0;
  double d = 0.0;
  double delta = 0.0;
  double level = 0.0;
  double a = 0.0;
  double a_hnh = 0.0;
};

SampledSignal enhance(const SampledSignal &x, const Params &params, std::vector<FrameTrace> *trace = nullptr);

void write_trace_csv(std::ostream &out, const std::vector<FrameTrace> &trace);

} // namespace nrse::hnh
