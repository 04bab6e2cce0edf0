// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nrse {

using Index = Eigen::Index;
using Cx = std::complex<double>;

// Row-per-frame layouts throughout: rows are frames l, columns are samples or bands j.
using RealVector = Eigen::ArrayXd;
using ComplexVector = Eigen::ArrayXcd;
using RealMatrix = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Array<Cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &msg)
{
  if (!cond) { throw Error(msg); }
}

template <typename Derived>
double mean_power(const Eigen::ArrayBase<Derived> &x)
{
  return x.size() == 0 ? 0.0 : x.square().mean();
}

template <typename Derived>
double energy(const Eigen::ArrayBase<Derived> &x)
{
  return x.square().sum();
}

inline Index next_pow2(Index n)
{
  Index p = 1;
  while (p < n) { p <<= 1; }
  return p;
}

} // namespace nrse
