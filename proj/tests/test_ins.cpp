// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <sstream>

#include "nrse/fft.hpp"
#include "nrse/ins.hpp"
#include "test_util.hpp"

using namespace nrse;
using namespace nrse::testing;

namespace {

RealVector chirp(Index n, int rate, double f0, double f1)
{
  RealVector x(n);
  const double dur = double(n) / rate;
  for (Index i = 0; i < n; ++i) {
    const double t = double(i) / rate;
    x[i] = std::sin(2.0 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) * t * t / dur));
  }
  return x;
}

RealVector bursts(Index n, Index period, std::uint64_t seed)
{
  RealVector x = gaussian(n, 1.0, seed);
  for (Index i = 0; i < n; ++i) {
    if ((i / period) % 2) { x[i] = 0.0; }
  }
  return x;
}

} // namespace

TEST_CASE("hermite tapers are orthonormal")
{
  for (Index len : {16, 37, 160, 1000}) {
    const RealMatrix h = hermite_tapers(len, 5);
    const Eigen::MatrixXd gram = h.matrix() * h.matrix().transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    // First taper is the symmetric Gaussian bump.
    CHECK(h(0, 0) == doctest::Approx(h(0, len - 1)).epsilon(1e-9));
    CHECK((h.row(0) >= -1e-15).all());
  }
  CHECK_THROWS_AS(hermite_tapers(3, 5), Error);
}

TEST_CASE("multitaper_spectrogram: variance reduction, zeros, stationarity")
{
  SUBCASE("five tapers reduce per-bin variance on white noise")
  {
    // Monte-Carlo over 100 trials at a single analysis position.
    const Index len = 256;
    RealMatrix one(100, 129), five(100, 129);
    for (int t = 0; t < 100; ++t) {
      const RealVector x = gaussian(len, 1.0, 1000 + std::uint64_t(t));
      one.row(t) = multitaper_spectrogram(x, len, 1, 1).row(0);
      five.row(t) = multitaper_spectrogram(x, len, 5, 1).row(0);
    }
    auto mean_bin_var = [](const RealMatrix &m) {
      const RealMatrix inner = m.middleCols(2, m.cols() - 4);
      const Eigen::Array<double, 1, Eigen::Dynamic> mu = inner.colwise().mean();
      return (inner.rowwise() - mu).square().colwise().mean().mean();
    };
    CHECK(mean_bin_var(five) < 0.5 * mean_bin_var(one));
  }
  SUBCASE("all-zero input gives an all-zero spectrogram")
  {
    const RealMatrix s = multitaper_spectrogram(RealVector::Zero(4000), 400, 5);
    CHECK(s.abs().maxCoeff() == 0.0);
  }
  SUBCASE("a stationary tone has far smaller distance variance than bursts")
  {
    const RealVector t = tone(8000, 440.0, 16000);
    const RealVector b = bursts(8000, 800, 3);
    auto dvar = [](const RealVector &x) {
      const RealVector d = local_global_distances(multitaper_spectrogram(x, 400, 5));
      return (d - d.mean()).square().mean();
    };
    CHECK(dvar(t) < 1e-3 * dvar(b));
  }
  SUBCASE("nonnegative, long tapers folded onto the capped grid")
  {
    const RealMatrix s = multitaper_spectrogram(gaussian(20000, 1.0, 4), 5000, 5, 8, 512);
    CHECK(s.cols() == 257);
    CHECK(s.rows() == 8);
    CHECK((s >= 0.0).all());
  }
  CHECK_THROWS_AS(multitaper_spectrogram(RealVector::Ones(100), 200, 5), Error);
}

TEST_CASE("surrogates preserve the magnitude spectrum")
{
  const SampledSignal x(am_noise(4001, 16000, 8), 16000);
  const SurrogateSet set = make_surrogates(x, 5, 77);
  REQUIRE(set.surrogates.size() == 5);
  const RealVector ref = fft::forward(x.samples()).abs();
  for (const auto &s : set.surrogates) {
    REQUIRE(s.size() == x.size());
    const RealVector mag = fft::forward(s.samples()).abs();
    CHECK(((mag - ref).abs() / ref.max(1e-300)).maxCoeff() <= 1e-8);
    CHECK(std::abs(energy(s.samples()) - energy(x.samples())) <= 1e-8 * energy(x.samples()));
    // Surrogate of a surrogate still matches the original magnitudes.
    const RealVector mag2 = fft::forward(make_surrogate(s, 5).samples()).abs();
    CHECK(((mag2 - ref).abs() / ref.max(1e-300)).maxCoeff() <= 1e-8);
  }
  // Phases actually change.
  CHECK((set.surrogates[0].samples() - x.samples()).abs().maxCoeff() > 1e-3);
  CHECK_THROWS_AS(make_surrogates(x, 0, 1), Error);
  CHECK_THROWS_AS(make_surrogate(SampledSignal(RealVector(0), 16000), 1), Error);
}

TEST_CASE("surrogates of a chirp score INS near one")
{
  const SampledSignal x(chirp(8000, 16000, 200.0, 3000.0), 16000);
  InsConfig cfg;
  cfg.n_surrogates = 20;
  const SurrogateSet set = make_surrogates(x, 50, 99);
  RealVector per_scale_mean = RealVector::Zero(Index(cfg.scales.size()));
  for (std::size_t k = 0; k < set.surrogates.size(); ++k) {
    cfg.seed = 500 + k;
    per_scale_mean += compute_ins(set.surrogates[k], cfg).values;
  }
  per_scale_mean /= 50.0;
  CHECK(per_scale_mean.mean() >= 0.9);
  CHECK(per_scale_mean.mean() <= 1.1);
  CHECK((per_scale_mean >= 0.8).all());
  CHECK((per_scale_mean <= 1.2).all());
}

TEST_CASE("compute_ins: white noise passes, bursts fail")
{
  InsConfig cfg;
  int stationary = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.seed = 40 + s;
    const InsProfile p = compute_ins({gaussian(4000, 1.0, 300 + s), 16000}, cfg);
    for (Index i = 0; i < p.size(); ++i) {
      stationary += p.values[i] <= p.gamma[i];
      ++total;
    }
  }
  CHECK(double(stationary) >= 0.9 * total);

  const InsProfile b = compute_ins({bursts(8000, 800, 12), 16000}, cfg);
  for (double mid : {0.02, 0.05, 0.1, 0.2, 0.3}) { CHECK_FALSE(is_stationary(b, mid)); }
}

TEST_CASE("compute_ins: scale invariance and determinism")
{
  InsConfig cfg;
  cfg.n_surrogates = 20;
  cfg.seed = 5;
  const RealVector x = am_noise(6000, 16000, 2);
  const InsProfile ref = compute_ins({x, 16000}, cfg);
  for (double a : {0.1, 10.0}) {
    const InsProfile p = compute_ins({a * x, 16000}, cfg);
    CHECK(((p.values - ref.values).abs() / ref.values).maxCoeff() <= 1e-6);
  }
  const InsProfile again = compute_ins({x, 16000}, cfg);
  CHECK((again.values == ref.values).all());
  CHECK((again.gamma == ref.gamma).all());
  CHECK((ref.values >= 0.0).all());
  CHECK((ref.gamma > 0.0).all());

  cfg.seed = 6;
  CHECK((compute_ins({x, 16000}, cfg).values != ref.values).any());
}

TEST_CASE("compute_ins: errors")
{
  CHECK_THROWS_AS(compute_ins({RealVector::Zero(4000), 16000}), Error);
  CHECK_THROWS_AS(compute_ins({RealVector::Ones(20), 16000}), Error);
  InsConfig bad;
  bad.scales = {1.5};
  CHECK_THROWS_AS(compute_ins({gaussian(4000, 1.0, 1), 16000}, bad), Error);
}

TEST_CASE("is_stationary follows the inclusive threshold")
{
  InsProfile p;
  p.scales = {0.1, 0.2, 0.3};
  p.taper_lengths = {10, 20, 30};
  p.gamma = RealVector::Constant(3, 1.25);
  p.values = RealVector(3);
  p.values << 1.25, 0.0, 2.5;
  CHECK(is_stationary(p, 0.1));
  CHECK(is_stationary(p, 0.2));
  CHECK_FALSE(is_stationary(p, 0.3));
  CHECK_THROWS_AS(is_stationary(p, 0.4), Error);

  std::ostringstream csv;
  write_ins_csv(csv, p);
  CHECK(csv.str() == "scale,taper_len,ins,gamma,stationary\n0.1,10,1.25,1.25,1\n0.2,20,0,1.25,1\n0.3,30,2.5,1.25,0\n");
}

TEST_CASE("gamma quantiles against closed forms")
{
  // Shape 1 is exponential.
  CHECK(gamma_quantile(1.0, 2.0, 0.95) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
  // Shape 2: CDF 1 - e^{-x}(1 + x); check by substitution.
  const double q = gamma_quantile(2.0, 1.0, 0.95);
  CHECK(1.0 - std::exp(-q) * (1.0 + q) == doctest::Approx(0.95).epsilon(1e-10));
  // Chi-square with 10 degrees of freedom, 95th percentile 18.307.
  CHECK(gamma_quantile(5.0, 2.0, 0.95) == doctest::Approx(18.307038053275146).epsilon(1e-10));
  // Large shape uses the continued fraction branch.
  CHECK(gamma_p(50.0, 80.0) == doctest::Approx(0.9998692160234086).epsilon(1e-12));

  // Constant surrogate variances collapse the threshold to one.
  CHECK(stationarity_threshold(RealVector::Constant(10, 3.0), 0.95) == 1.0);
}

TEST_CASE("derive_seed separates streams")
{
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
