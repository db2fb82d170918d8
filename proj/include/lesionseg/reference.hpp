#pragma once

#include "lesionseg/enhance.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/tensor.hpp"

// Serial loop-for-loop versions of the parallel kernels. They follow the
// textbook definitions directly, accumulate in double and take no
// shortcuts; tests compare the OpenMP kernels against them and the benchmark
// target measures the speed-up. Not linked into the main library.

namespace lesionseg::reference {

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int padding);

/// Scatter form: every input pixel adds its 2x2 weighted footprint.
Tensor upconv2(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor maxpool2(const Tensor& x);

/// Direct se x se window scan; out-of-bounds pixels are background.
BinaryMask erode(const BinaryMask& m, int se_size);
BinaryMask dilate(const BinaryMask& m, int se_size);

/// Closing on an unbounded background plane, evaluated on a canvas padded
/// by the structuring-element radius.
BinaryMask close(const BinaryMask& m, int se_size);

/// Per-pixel directional responses and norm, recomputing kernel
/// coefficients from the recurrence on the fly.
PlaneF32 fractional_magnitude(const PlaneF32& intensity, const TextureConfig& cfg);

}  // namespace lesionseg::reference
