#include "lesionseg/unet.hpp"

#include <cstring>
#include <string>
#include <vector>

#include "lesionseg/kernels.hpp"

namespace lesionseg {

namespace {

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string msg = "weight validation failed (" + std::to_string(problems.size()) + " problems):";
    for (const auto& p : problems)
        msg += "\n  " + p;
    return msg;
}

class Runner {
public:
    Runner(const WeightStore& w, const ForwardOptions& opts) : w_(w), opts_(opts) {}

    Tensor conv_relu(const Tensor& x, const std::string& layer) const
    {
        Tensor y = kernels::conv2d(x, w_.at(layer + ".weight"), w_.at(layer + ".bias"), 1);
        kernels::relu_inplace(y);
        check(y, layer);
        return y;
    }

    Tensor block(const Tensor& x, const std::string& stage) const
    {
        return conv_relu(conv_relu(x, stage + ".conv1"), stage + ".conv2");
    }

    Tensor up(const Tensor& x, const std::string& stage) const
    {
        Tensor y = kernels::upconv2(x, w_.at(stage + ".up.weight"), w_.at(stage + ".up.bias"));
        check(y, stage + ".up");
        return y;
    }

    Tensor head(const Tensor& x) const
    {
        Tensor y = kernels::conv2d(x, w_.at("head.weight"), w_.at("head.bias"), 0);
        check(y, "head");
        return y;
    }

private:
    void check(const Tensor& t, const std::string& layer) const
    {
        if (opts_.check_finite && t.first_non_finite() != t.size())
            throw std::runtime_error("non-finite activation after layer " + layer);
    }

    const WeightStore& w_;
    const ForwardOptions& opts_;
};

}  // namespace

UNet::UNet(WeightStore weights) : weights_(std::move(weights)), spec_(infer_spec(weights_))
{
    if (const auto problems = validate(weights_, spec_); !problems.empty())
        throw WeightFileError(join_problems(problems));
}

UNet::UNet(WeightStore weights, const UNetSpec& spec) : weights_(std::move(weights)), spec_(spec)
{
    if (const auto problems = validate(weights_, spec_); !problems.empty())
        throw WeightFileError(join_problems(problems));
}

Tensor UNet::logits(const Tensor& input, const ForwardOptions& opts) const
{
    if (input.rank() != 3 || static_cast<int>(input.dim(0)) != spec_.in_channels)
        throw InvalidArgument("network input must be [" + std::to_string(spec_.in_channels) + ",H,W], got " +
                              shape_string(input.shape()));
    const std::size_t multiple = std::size_t{1} << spec_.depth;
    if (input.dim(1) % multiple != 0 || input.dim(2) % multiple != 0)
        throw InvalidArgument("network input spatial dims must be divisible by " + std::to_string(multiple));

    const Runner run(weights_, opts);
    std::vector<Tensor> skips;
    skips.reserve(static_cast<std::size_t>(spec_.depth));

    Tensor x = input;
    for (int i = 1; i <= spec_.depth; ++i) {
        skips.push_back(run.block(x, "enc" + std::to_string(i)));
        x = kernels::maxpool2(skips.back());
    }
    x = run.block(x, "bottleneck");
    for (int i = spec_.depth; i >= 1; --i) {
        const std::string stage = "dec" + std::to_string(i);
        x = run.block(kernels::concat(run.up(x, stage), skips[static_cast<std::size_t>(i - 1)]), stage);
    }
    return run.head(x);
}

ProbMap UNet::forward(const ChannelStack& stack, const ForwardOptions& opts) const
{
    Tensor out = kernels::sigmoid(logits(stack_to_tensor(stack), opts));
    return ProbMap(static_cast<int>(out.dim(2)), static_cast<int>(out.dim(1)),
                   std::vector<float>(out.data().begin(), out.data().end()));
}

Tensor stack_to_tensor(const ChannelStack& stack)
{
    const auto w = static_cast<std::size_t>(stack.planes[0].width());
    const auto h = static_cast<std::size_t>(stack.planes[0].height());
    Tensor t({stack.planes.size(), h, w});
    for (std::size_t c = 0; c < stack.planes.size(); ++c) {
        const auto& p = stack.planes[c];
        if (static_cast<std::size_t>(p.width()) != w || static_cast<std::size_t>(p.height()) != h)
            throw InvalidArgument("channel stack planes differ in size");
        std::memcpy(t.ptr() + c * w * h, p.data().data(), w * h * sizeof(float));
    }
    return t;
}

ProbMap forward(const ChannelStack& stack, const WeightStore& weights)
{
    return UNet(weights).forward(stack);
}

}  // namespace lesionseg
