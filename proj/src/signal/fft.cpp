// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/fft.hpp"

#define EIGEN_FFTW_DEFAULT
#include <fftw3.h>
#include <unsupported/Eigen/FFT>

#include <vector>

namespace nrse::fft {

namespace {

// Plans are cached per engine; engines are per thread, with FFTW's planner
// serialized so engines may be created concurrently. Eigen keys its plan
// cache by length and direction only, so a complex and a real transform of
// the same length would share a plan; real and complex get separate engines.
Eigen::FFT<double> &engine(bool real)
{
  static const bool planner_safe = [] {
    fftw_make_planner_thread_safe();
    return true;
  }();
  (void)planner_safe;
  thread_local Eigen::FFT<double> r, c;
  return real ? r : c;
}

} // namespace

ComplexVector forward(const RealVector &x)
{
  auto &e = engine(true);
  e.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<Cx> out;
  e.fwd(out, in);
  return Eigen::Map<const ComplexVector>(out.data(), static_cast<Index>(out.size()));
}

RealVector inverse(const ComplexVector &half, Index n)
{
  require(half.size() == n / 2 + 1, "fft::inverse: half spectrum size does not match length");
  auto &e = engine(true);
  e.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Cx> in(half.data(), half.data() + half.size());
  std::vector<double> out;
  e.inv(out, in, static_cast<std::size_t>(n));
  return Eigen::Map<const RealVector>(out.data(), static_cast<Index>(out.size()));
}

ComplexVector forward(const ComplexVector &x)
{
  auto &e = engine(false);
  e.ClearFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Cx> in(x.data(), x.data() + x.size());
  std::vector<Cx> out;
  e.fwd(out, in);
  return Eigen::Map<const ComplexVector>(out.data(), static_cast<Index>(out.size()));
}

ComplexVector inverse(const ComplexVector &x)
{
  auto &e = engine(false);
  e.ClearFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Cx> in(x.data(), x.data() + x.size());
  std::vector<Cx> out;
  e.inv(out, in);
  return Eigen::Map<const ComplexVector>(out.data(), static_cast<Index>(out.size()));
}

} // namespace nrse::fft
