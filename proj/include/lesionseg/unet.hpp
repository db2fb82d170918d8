#pragma once

#include "lesionseg/enhance.hpp"
#include "lesionseg/image.hpp"
#include "lesionseg/tensor.hpp"
#include "lesionseg/weights.hpp"

namespace lesionseg {

/// Per-pixel foreground probabilities in [0,1].
using ProbMap = PlaneF32;

struct ForwardOptions {
    /// Abort with the offending layer's name if any activation is NaN/Inf.
    bool check_finite = false;
};

/// Validated, immutable network. Safe to share across threads.
class UNet {
public:
    /// Throws WeightFileError listing every validation problem.
    explicit UNet(WeightStore weights);
    UNet(WeightStore weights, const UNetSpec& spec);

    const UNetSpec& spec() const { return spec_; }
    const WeightStore& weights() const { return weights_; }

    /// Pre-sigmoid output, shape [1, H, W] for an input of [C, H, W].
    /// H and W must be divisible by 2^depth.
    Tensor logits(const Tensor& input, const ForwardOptions& opts = {}) const;

    ProbMap forward(const ChannelStack& stack, const ForwardOptions& opts = {}) const;

private:
    WeightStore weights_;
    UNetSpec spec_;
};

Tensor stack_to_tensor(const ChannelStack& stack);

/// Convenience wrapper: validates `weights` and runs one forward pass.
ProbMap forward(const ChannelStack& stack, const WeightStore& weights);

}  // namespace lesionseg
