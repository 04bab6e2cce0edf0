// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nrse/signal.hpp"

namespace nrse {

// Stream splitting for reproducible per-task RNG seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct InsConfig
{
  // Analysis lengths as fractions of the signal duration.
  std::vector<double> scales{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
  int n_surrogates = 50;
  int n_tapers = 5;
  std::uint64_t seed = 0;
  Index n_positions = 32;   // spectra per scale, evenly spread over the signal
  Index min_taper_len = 16; // shorter scales are clipped up to this
  Index max_nfft = 1024;    // longer tapers are folded onto this grid
  double confidence = 0.95;

  void validate() const;
};

struct InsProfile
{
  std::vector<double> scales;
  std::vector<Index> taper_lengths;
  RealVector values; // INS per scale
  RealVector gamma;  // stationarity threshold per scale
  int n_surrogates = 0;
  std::uint64_t seed = 0;

  Index size() const { return values.size(); }
  double max_value() const { return values.size() ? values.maxCoeff() : 0.0; }
};

struct SurrogateSet
{
  std::vector<SampledSignal> surrogates;
  std::uint64_t seed = 0;
};

// Orthonormal discrete Hermite functions; row k is the k-th taper.
RealMatrix hermite_tapers(Index len, int n_tapers);

// Power spectra averaged over n_tapers Hermite tapers of length taper_len, one
// row per analysis position. Result is nonnegative.
RealMatrix multitaper_spectrogram(const RealVector &x, Index taper_len, int n_tapers, Index n_positions = 32,
                                  Index max_nfft = 1024);

// Symmetric Kullback-Leibler divergence between each normalized local spectrum
// and the normalized time-averaged spectrum.
RealVector local_global_distances(const RealMatrix &spectrogram);

// |FFT(x)| with i.i.d. uniform phases, Hermitian so the result is real.
SampledSignal make_surrogate(const SampledSignal &x, std::uint64_t seed);
SurrogateSet make_surrogates(const SampledSignal &x, int n, std::uint64_t seed);

InsProfile compute_ins(const SampledSignal &x, const InsConfig &cfg = {});

// INS(scale) <= gamma(scale).
bool is_stationary(const InsProfile &profile, double scale);

// Quantile of Gamma(shape, scale) and the regularized lower incomplete gamma.
double gamma_p(double shape, double x);
double gamma_quantile(double shape, double scale, double p);

// Threshold from surrogate variances: sqrt of the moment-matched Gamma quantile
// of theta0_k / mean(theta0).
double stationarity_threshold(const RealVector &theta0, double confidence);

void write_ins_csv(std::ostream &out, const InsProfile &profile);

} // namespace nrse
