// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <sstream>

#include "nrse/hnh.hpp"
#include "test_util.hpp"

using namespace nrse;
using namespace nrse::hnh;
using namespace nrse::testing;

namespace {

// Alternating 200 Hz tone bursts and fricative-like noise at varying levels.
RealVector tone_noise_alternation(Index n, int rate, std::uint64_t seed)
{
  const RealVector t = tone(n, 200.0, rate, 0.8);
  const RealVector w = gaussian(n, 0.05, seed);
  RealVector x(n);
  for (Index i = 0; i < n; ++i) {
    const Index seg = i / 1500;
    x[i] = seg % 2 == 0 ? t[i] * (0.3 + 0.2 * double(seg % 5)) : w[i] * double(1 + seg % 3);
  }
  return x;
}

} // namespace

TEST_CASE("classify_frames: canonical cases")
{
  SUBCASE("full-scale 200 Hz tone frames are harmonic")
  {
    const auto fs = frame_signal({tone(8000, 200.0, 16000), 16000}, Framing::speech_default(16000));
    const auto c = classify_frames(fs, 0.35 * 512, -30.0);
    for (auto lab : c.labels) { CHECK(lab == FrameClass::Harmonic); }
  }
  SUBCASE("noise 50 dB below the loudest frame is non-harmonic")
  {
    RealVector x = tone(8000, 200.0, 16000);
    x.tail(4000) = gaussian(4000, 1.0, 3) * std::pow(10.0, -50.0 / 20.0);
    const auto fs = frame_signal({x, 16000}, Framing::speech_default(16000));
    // Energy range is about 50 dB > 30, so the threshold moves to -0.55 * range.
    const auto c = classify_frames(fs, 0.35 * 512, -30.0);
    CHECK(c.en_th_effective == doctest::Approx(-0.55 * (c.en_max - c.en_min)));
    for (Index l = 0; l < fs.size(); ++l) {
      if (fs.span(l).first >= 4000) { CHECK(c.labels[std::size_t(l)] == FrameClass::NonHarmonic); }
    }
  }
  SUBCASE("brute-force oracle over alternating bursts")
  {
    const RealVector x = tone_noise_alternation(24000, 16000, 4);
    const Framing fr = Framing::speech_default(16000);
    const auto fs = frame_signal({x, 16000}, fr);
    for (double en_th : {-30.0, -10.0, -60.0}) {
      for (double zc_th : {20.0, 80.0, 179.2}) {
        const auto c = classify_frames(fs, zc_th, en_th);
        // Oracle: recompute EN and ZC from raw samples and apply both inequalities literally.
        const Index count = fs.size();
        std::vector<double> en(static_cast<std::size_t>(count));
        std::vector<int> zc(static_cast<std::size_t>(count));
        for (Index l = 0; l < count; ++l) {
          double e = 0.0;
          int z = 0;
          const Index b = l * fr.hop;
          const Index end = std::min(b + fr.frame_len, x.size());
          for (Index i = b; i < end; ++i) {
            e += x[i] * x[i];
            if (i > b && ((x[i - 1] >= 0) != (x[i] >= 0))) { ++z; }
          }
          en[std::size_t(l)] = 10.0 * std::log10(e + 1e-12);
          zc[std::size_t(l)] = z;
        }
        const double mx = *std::max_element(en.begin(), en.end());
        const double mn = *std::min_element(en.begin(), en.end());
        const double th = (mx - mn) > std::abs(en_th) ? -0.55 * (mx - mn) : en_th;
        int agree = 0;
        for (Index l = 0; l < count; ++l) {
          const bool harm = zc[std::size_t(l)] < zc_th && en[std::size_t(l)] - mx > th;
          agree += harm == (c.labels[std::size_t(l)] == FrameClass::Harmonic);
        }
        CHECK(agree == count);
      }
    }
  }
  SUBCASE("labels partition the frames")
  {
    const RealVector x = tone_noise_alternation(24000, 16000, 5);
    const auto fs = frame_signal({x, 16000}, Framing::speech_default(16000));
    const auto c = classify_frames(fs, 100.0, -30.0);
    REQUIRE(c.labels.size() == std::size_t(fs.size()));
    // Splitting frames by class and summing the two branches reproduces each frame.
    for (Index l = 0; l < fs.size(); ++l) {
      const bool h = c.labels[std::size_t(l)] == FrameClass::Harmonic;
      const RealVector harm = h ? RealVector(fs.frames.row(l).transpose()) : RealVector::Zero(fs.framing.frame_len);
      const RealVector non = h ? RealVector::Zero(fs.framing.frame_len) : RealVector(fs.frames.row(l).transpose());
      CHECK(((harm + non) - fs.frames.row(l).transpose()).abs().maxCoeff() == 0.0);
    }
  }
  CHECK_THROWS_AS(classify_frames(FrameSequence{}, 10.0, -30.0), Error);
}

TEST_CASE("segment_rgs: tiling")
{
  auto frames_of = [](Index count) {
    FrameSequence fs;
    fs.framing = {512, 256};
    fs.frames = RealMatrix::Zero(count, 512);
    fs.energy_db = RealVector::Zero(count);
    fs.zero_crossings = Eigen::ArrayXi::Zero(count);
    fs.signal_length = (count - 1) * 256 + 512;
    return fs;
  };
  auto g40 = segment_rgs(frames_of(40), 8);
  REQUIRE(g40.size() == 5);
  for (const auto &g : g40) { CHECK(g.size() == 8); }

  auto g42 = segment_rgs(frames_of(42), 8);
  REQUIRE(g42.size() == 6);
  CHECK(g42.back().size() == 2);
  CHECK(g42.back().frame_end == 42);
  for (std::size_t m = 1; m < g42.size(); ++m) { CHECK(g42[m].frame_begin == g42[m - 1].frame_end); }

  CHECK_THROWS_AS(segment_rgs(frames_of(5), 8), Error);
  CHECK_THROWS_AS(segment_rgs(frames_of(40), 1), Error);
}

TEST_CASE("rg_ins: a speech-like burst group outscores stationary noise")
{
  const Framing fr = Framing::speech_default(16000);
  RealVector x = gaussian(2 * 2304, 0.1, 9);
  // Second group: on/off bursts.
  for (Index i = 2304; i < 2 * 2304; ++i) { x[i] = ((i / 300) % 2) ? 0.0 : x[i] * 8.0; }
  const SampledSignal sig(x, 16000);
  const auto fs = frame_signal(sig, fr);
  const auto groups = segment_rgs(fs, 8);
  REQUIRE(groups.size() >= 2);
  InsConfig cfg = Params::default_rg_ins();
  cfg.seed = 3;
  const RealVector noise_v = rg_ins(sig, fs, groups[0], cfg);
  const RealVector speech_v = rg_ins(sig, fs, groups[1], cfg);
  CHECK(speech_v.matrix().norm() > noise_v.matrix().norm());

  // Silent group maps to the zero vector.
  const SampledSignal quiet(RealVector::Zero(4608), 16000);
  const auto qfs = frame_signal(quiet, fr);
  CHECK(rg_ins(quiet, qfs, segment_rgs(qfs, 8)[0], cfg).abs().maxCoeff() == 0.0);
}

TEST_CASE("delta_ins: normalized distance")
{
  RealVector a(2), b(2);
  a << 3.0, 0.0;
  b << 0.0, 4.0;
  CHECK(delta_ins(a, b) == doctest::Approx(5.0 / 7.0));
  CHECK(delta_ins(a, a) == 0.0);
  CHECK(delta_ins(a, RealVector::Zero(2)) == doctest::Approx(1.0));
  CHECK(delta_ins(RealVector::Zero(2), RealVector::Zero(2)) == 0.0);
  CHECK_THROWS_AS(delta_ins(a, RealVector::Zero(3)), Error);
  // Bounded by the triangle inequality.
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RealVector u = gaussian(7, 1.0, s).abs(), v = gaussian(7, 1.0, s + 100).abs();
    const double d = delta_ins(u, v);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("absorption_gain: fixed point, asymptote, recursion")
{
  AbsorptionParams p;
  p.theta_ins = 0.15;
  p.d0 = p.d0_prime = 0.5;
  p.min_shift = 0.1;
  p.max_gain_nonstationary = 0.9;
  SUBCASE("A equals L(m) at d = 1 on the stationary branch")
  {
    for (double level : {0.1, 0.3, 0.55, 1.0}) {
      CHECK(absorption_gain(1.0, 0.05, level, p) == doctest::Approx(level).epsilon(1e-14));
    }
  }
  SUBCASE("large k drives A to S at d = 0")
  {
    AbsorptionParams steep = p;
    steep.k = 200.0;
    CHECK(absorption_gain(0.0, 0.0, 0.8, steep) == doctest::Approx(steep.min_shift).epsilon(1e-12));
  }
  SUBCASE("memory weight boundaries")
  {
    AbsorptionParams p1 = p;
    p1.memory = 1.0;
    CHECK(group_level(0.42, 0.9, p1) == 0.42);
    p1.memory = 0.0;
    CHECK(group_level(0.42, 0.9, p1) == 0.9);
    CHECK(group_level(0.4, 0.2, p) == doctest::Approx(0.7 * 0.4 + 0.3 * 0.2));
  }
  SUBCASE("non-stationary branch follows L' sigmoid")
  {
    CHECK(absorption_gain(0.5, 0.9, 0.2, p) == doctest::Approx(0.45));
    CHECK(absorption_gain(1.0, 0.9, 0.2, p) == doctest::Approx(0.9 / (1.0 + std::exp(-5.0))));
  }
  SUBCASE("forced absorption bypasses the law")
  {
    AbsorptionParams f = p;
    f.forced_absorption = 1.0;
    CHECK(absorption_gain(0.2, 0.9, 0.1, f) == 1.0);
  }
  SUBCASE("invalid parameters")
  {
    AbsorptionParams bad = p;
    bad.min_shift = 0.0;
    CHECK_THROWS_AS(absorption_gain(0.5, 0.1, 0.5, bad), Error);
    bad = p;
    bad.k = -1.0;
    CHECK_THROWS_AS(absorption_gain(0.5, 0.1, 0.5, bad), Error);
    CHECK_THROWS_AS(absorption_gain(1.5, 0.1, 0.5, p), Error);
  }
}

TEST_CASE("harmonic_gain: default constants")
{
  AbsorptionParams p;
  CHECK(p.f_harm == 1.1);
  CHECK(p.f_nonharm == 0.7);
  CHECK(p.c_harm == 0.2);
  CHECK(p.c_nonharm == 0.1);
  CHECK(harmonic_gain(0.4, FrameClass::Harmonic, 0.0, p) == doctest::Approx(0.4));
  CHECK(harmonic_gain(0.4, FrameClass::NonHarmonic, 0.0, p) == doctest::Approx(0.4));
  CHECK(harmonic_gain(0.4, FrameClass::Harmonic, 1.0, p) == doctest::Approx(0.84));
  CHECK(harmonic_gain(0.4, FrameClass::NonHarmonic, 1.0, p) == doctest::Approx(0.12));
  // Clamp to [0.05, 1].
  CHECK(harmonic_gain(0.9, FrameClass::Harmonic, 1.0, p) == 1.0);
  CHECK(harmonic_gain(0.06, FrameClass::NonHarmonic, 1.0, p) == p.gain_floor);
}

TEST_CASE("gain laws over the full grid")
{
  AbsorptionParams p;
  for (int di = 0; di <= 10; ++di) {
    const double delta = di / 10.0;
    const double level = std::max(p.min_shift, delta);
    double prev = 0.0;
    for (int li = 0; li <= 10; ++li) {
      const double d = li / 10.0;
      const double a = absorption_gain(d, delta, level, p);
      CHECK(a > 0.0);
      CHECK(a <= 1.0);
      CHECK(a >= prev); // nondecreasing in d
      prev = a;
      const double h = harmonic_gain(a, FrameClass::Harmonic, delta, p);
      const double n = harmonic_gain(a, FrameClass::NonHarmonic, delta, p);
      CHECK(h > 0.0);
      CHECK(h <= 1.0);
      CHECK(n > 0.0);
      if (delta > 0.0 && h < 1.0 && n > p.gain_floor) { CHECK(h > n); }
      if (delta > 0.0) { CHECK(h >= n); }
    }
  }
}

TEST_CASE("enhance: silence, identity bypass, determinism, bounded gains")
{
  Params params;
  params.seed = 17;
  SUBCASE("silence in, silence out")
  {
    const SampledSignal y = enhance({RealVector::Zero(16000), 16000}, params);
    CHECK(y.size() == 16000);
    CHECK(y.samples().abs().maxCoeff() == 0.0);
  }
  SUBCASE("unity-gain bypass reproduces the input")
  {
    Params id = params;
    id.absorption.f_harm = 0.0;
    id.absorption.f_nonharm = 0.0;
    id.absorption.forced_absorption = 1.0;
    const RealVector x = tone_noise_alternation(20000, 16000, 6);
    const SampledSignal y = enhance({x, 16000}, id);
    REQUIRE(y.size() == x.size());
    CHECK(rel_l2(y.samples(), x) <= 1e-10);
  }
  SUBCASE("deterministic, gain-bounded, length preserving")
  {
    const RealVector x = tone_noise_alternation(20001, 16000, 7);
    std::vector<FrameTrace> trace;
    const SampledSignal a = enhance({x, 16000}, params, &trace);
    const SampledSignal b = enhance({x, 16000}, params);
    CHECK(a.size() == x.size());
    CHECK((a.samples() == b.samples()).all());
    REQUIRE(!trace.empty());
    for (const auto &t : trace) {
      CHECK(t.a_hnh > 0.0);
      CHECK(t.a_hnh <= 1.0);
      CHECK(t.delta >= 0.0);
      CHECK(t.delta <= 1.0);
    }
    CHECK(trace.front().delta == 0.0);
    // Never louder than the input, frame by frame.
    const auto fin = frame_signal({x, 16000}, params.framing(16000));
    const auto fout = frame_signal(a, params.framing(16000));
    for (Index l = 0; l < fin.size(); ++l) { CHECK(fout.energy_db[l] <= fin.energy_db[l] + 1e-9); }

    std::ostringstream csv;
    write_trace_csv(csv, trace);
    CHECK(csv.str().rfind("frame,group,class,zc,en_db,d,delta,level,a,a_hnh\n", 0) == 0);
  }
  SUBCASE("invalid parameters")
  {
    Params bad = params;
    bad.rg_len = 1;
    CHECK_THROWS_AS(enhance({RealVector::Ones(16000), 16000}, bad), Error);
    bad = params;
    bad.absorption.memory = 1.5;
    CHECK_THROWS_AS(enhance({RealVector::Ones(16000), 16000}, bad), Error);
  }
}
