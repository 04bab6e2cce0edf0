// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <map>

#include "nrse/fft.hpp"
#include "nrse/ins.hpp"

namespace nrse {

namespace {

// Hermite functions reach ~1e-6 of their peak by |t| = 6 for the first few orders.
constexpr double kHermiteSupport = 6.0;

RealMatrix build_hermite(Index len, int n_tapers)
{
  Eigen::MatrixXd h(len, n_tapers);
  for (Index i = 0; i < len; ++i) {
    const double t = len == 1 ? 0.0 : -kHermiteSupport + 2.0 * kHermiteSupport * double(i) / double(len - 1);
    const double g = std::exp(-0.5 * t * t);
    // Physicists' recurrence scaled to keep the values O(1).
    double prev = 0.0, cur = 1.0;
    for (int k = 0; k < n_tapers; ++k) {
      h(i, k) = cur * g;
      const double next = std::sqrt(2.0 / (k + 1)) * t * cur - std::sqrt(double(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
    }
  }
  // Orthonormalize in order, which keeps each column close to its continuous counterpart.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(h);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(len, n_tapers);
  for (int k = 0; k < n_tapers; ++k) {
    if (q.col(k).dot(h.col(k)) < 0) { q.col(k) *= -1.0; }
  }
  return q.transpose().array();
}

} // namespace

RealMatrix hermite_tapers(Index len, int n_tapers)
{
  require(len >= 1 && n_tapers >= 1, "hermite_tapers: invalid size");
  require(n_tapers <= len, "hermite_tapers: more tapers than samples");
  thread_local std::map<std::pair<Index, int>, RealMatrix> cache;
  auto key = std::make_pair(len, n_tapers);
  auto it = cache.find(key);
  if (it == cache.end()) { it = cache.emplace(key, build_hermite(len, n_tapers)).first; }
  return it->second;
}

RealMatrix multitaper_spectrogram(const RealVector &x, Index taper_len, int n_tapers, Index n_positions,
                                  Index max_nfft)
{
  require(n_tapers >= 1, "multitaper_spectrogram: need at least one taper");
  require(taper_len >= 2 && taper_len <= x.size(), "multitaper_spectrogram: taper longer than signal");
  require(n_positions >= 1 && max_nfft >= 2, "multitaper_spectrogram: invalid grid");

  const RealMatrix tapers = hermite_tapers(taper_len, n_tapers);
  const Index positions = std::min(n_positions, x.size() - taper_len + 1);
  const Index nfft = std::min(next_pow2(taper_len), next_pow2(max_nfft));
  RealMatrix spec = RealMatrix::Zero(positions, nfft / 2 + 1);

  RealVector buf(nfft);
  for (Index p = 0; p < positions; ++p) {
    const Index start = positions == 1 ? 0 : (p * (x.size() - taper_len)) / (positions - 1);
    const auto seg = x.segment(start, taper_len);
    for (int k = 0; k < n_tapers; ++k) {
      buf.setZero();
      // Folding modulo nfft samples the taper's spectrum exactly on the nfft grid.
      for (Index b = 0; b < taper_len; b += nfft) {
        const Index m = std::min(nfft, taper_len - b);
        buf.head(m) += seg.segment(b, m) * tapers.row(k).segment(b, m).transpose();
      }
      spec.row(p) += fft::forward(buf).abs2().transpose();
    }
  }
  return spec / double(n_tapers);
}

RealVector local_global_distances(const RealMatrix &spec)
{
  const double total = spec.sum();
  require(total > 0.0, "spectral distance undefined for an all-zero spectrogram");
  const double eps = 1e-10 * total / double(spec.size());
  const RealMatrix floored = spec + eps;
  RealVector global = floored.colwise().mean().transpose();
  global /= global.sum();

  RealVector d(spec.rows());
  for (Index l = 0; l < spec.rows(); ++l) {
    RealVector local = floored.row(l).transpose();
    local /= local.sum();
    d[l] = ((local - global) * (local / global).log()).sum();
  }
  return d;
}

} // namespace nrse
