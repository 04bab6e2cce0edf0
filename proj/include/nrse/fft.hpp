// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "nrse/types.hpp"

namespace nrse::fft {

// Half spectrum (n/2 + 1 bins) of a real sequence.
ComplexVector forward(const RealVector &x);

// Inverse of forward(); n is the time-domain length.
RealVector inverse(const ComplexVector &half, Index n);

// Full complex transforms, unnormalized forward and 1/n inverse.
ComplexVector forward(const ComplexVector &x);
ComplexVector inverse(const ComplexVector &x);

} // namespace nrse::fft
