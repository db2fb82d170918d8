#pragma once

#include "lesionseg/tensor.hpp"

// OpenMP layer kernels for the inference engine. Every output element is
// produced by exactly one thread with a fixed accumulation order, so results
// are bit-identical for any thread count. Serial loop-for-loop versions live
// in lesionseg/reference.hpp.

namespace lesionseg::kernels {

/// Stride-1 cross-correlation plus bias.
/// x: [C_in, H, W], w: [C_out, C_in, k, k], b: [C_out]
/// -> [C_out, H + 2p - k + 1, W + 2p - k + 1]
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int padding);

/// 2x2 stride-2 transposed convolution.
/// x: [C_in, H, W], w: [C_in, C_out, 2, 2], b: [C_out] -> [C_out, 2H, 2W]
Tensor upconv2(const Tensor& x, const Tensor& w, const Tensor& b);

/// 2x2 stride-2 max pooling; H and W must be even.
Tensor maxpool2(const Tensor& x);

/// Channel-axis concatenation of two [C, H, W] tensors.
Tensor concat(const Tensor& a, const Tensor& b);

void relu_inplace(Tensor& x);
Tensor relu(Tensor x);

void sigmoid_inplace(Tensor& x);
Tensor sigmoid(Tensor x);

}  // namespace lesionseg::kernels
