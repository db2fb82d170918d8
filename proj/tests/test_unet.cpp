#include "doctest.h"

#include <omp.h>

#include <fstream>

#include "lesionseg/kernels.hpp"
#include "lesionseg/raw_io.hpp"
#include "lesionseg/reference.hpp"
#include "lesionseg/unet.hpp"
#include "lesionseg/weights.hpp"
#include "mutations.hpp"
#include "test_support.hpp"

using namespace lesionseg;

namespace {

const UNetSpec kTiny{5, 4, 4};

WeightStore tiny_weights()
{
    return load_weights(testing::fixture("tiny_unet.unetw"));
}

std::vector<unsigned char> slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool names(const std::vector<std::string>& problems, const std::string& layer)
{
    for (const auto& p : problems)
        if (p.rfind(layer + ":", 0) != 0)
            return false;
    return !problems.empty();
}

}  // namespace

TEST_CASE("conv2d: identity and constant kernels")
{
    std::mt19937 rng(1);
    const Tensor x = testing::random_tensor(rng, {3, 6, 5});

    Tensor w({3, 3, 1, 1});
    for (std::size_t c = 0; c < 3; ++c)
        w.data()[c * 3 + c] = 1.0f;
    CHECK(kernels::conv2d(x, w, Tensor({3}), 0) == x);

    const Tensor y = kernels::conv2d(x, Tensor({2, 3, 3, 3}), Tensor({2}, 0.75f), 1);
    CHECK(y.shape() == Shape{2, 6, 5});
    for (float v : y.data())
        REQUIRE(v == 0.75f);
}

TEST_CASE("conv2d: hand-computed 3x3 same-padded example")
{
    // 1 channel 3x3 input 1..9, all-ones kernel: each output is the sum of its
    // zero-padded neighbourhood.
    Tensor x({1, 3, 3}, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor y = kernels::conv2d(x, Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}, 1.0f), 1);
    const float want[9] = {13, 22, 17, 28, 46, 34, 25, 40, 29};
    for (int i = 0; i < 9; ++i)
        CHECK(y.data()[i] == want[i]);
}

TEST_CASE("conv2d matches the naive oracle on random tensors")
{
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> dim(1, 9), ch(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = trial % 3 == 0 ? 1 : 3;
        const int pad = k == 3 ? trial % 2 : 0;
        const std::size_t cin = ch(rng), cout = ch(rng);
        const std::size_t h = dim(rng) + 2, w = dim(rng) + 2;
        const Tensor x = testing::random_tensor(rng, {cin, h, w});
        const Tensor wt = testing::random_tensor(rng, {cout, cin, std::size_t(k), std::size_t(k)});
        const Tensor b = testing::random_tensor(rng, {cout});
        const Tensor got = kernels::conv2d(x, wt, b, pad);
        const Tensor want = reference::conv2d(x, wt, b, pad);
        REQUIRE(got.shape() == want.shape());
        REQUIRE(testing::max_abs_diff(got, want) <= 1e-5);
    }
}

TEST_CASE("conv2d rejects mismatched shapes")
{
    CHECK_THROWS_AS(kernels::conv2d(Tensor({3, 4, 4}), Tensor({2, 4, 3, 3}), Tensor({2}), 1), InvalidArgument);
    CHECK_THROWS_AS(kernels::conv2d(Tensor({3, 4, 4}), Tensor({2, 3, 3, 3}), Tensor({3}), 1), InvalidArgument);
    CHECK_THROWS_AS(kernels::conv2d(Tensor({3, 2, 2}), Tensor({2, 3, 5, 5}), Tensor({2}), 0), InvalidArgument);
}

TEST_CASE("relu, maxpool2 and sigmoid basics")
{
    const Tensor r = kernels::relu(Tensor({2}, std::vector<float>{-1.0f, 2.0f}));
    CHECK(r.data()[0] == 0.0f);
    CHECK(r.data()[1] == 2.0f);

    const Tensor p = kernels::maxpool2(Tensor({1, 2, 2}, std::vector<float>{1, 3, 2, 0}));
    CHECK(p.shape() == Shape{1, 1, 1});
    CHECK(p.data()[0] == 3.0f);
    CHECK_THROWS_AS(kernels::maxpool2(Tensor({1, 3, 4})), InvalidArgument);

    const Tensor s = kernels::sigmoid(Tensor({3}, std::vector<float>{-40.0f, 0.0f, 40.0f}));
    CHECK(s.data()[0] >= 0.0f);
    CHECK(s.data()[1] == 0.5f);
    CHECK(s.data()[2] <= 1.0f);
}

TEST_CASE("maxpool2 and upconv2 match naive oracles")
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> dim(1, 8), ch(1, 5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = ch(rng), h = 2 * dim(rng), w = 2 * dim(rng);
        const Tensor x = testing::random_tensor(rng, {c, h, w});
        REQUIRE(testing::max_abs_diff(kernels::maxpool2(x), reference::maxpool2(x)) == 0.0);

        const std::size_t cout = ch(rng);
        const Tensor wt = testing::random_tensor(rng, {c, cout, 2, 2});
        const Tensor b = testing::random_tensor(rng, {cout});
        const Tensor got = kernels::upconv2(x, wt, b);
        const Tensor want = reference::upconv2(x, wt, b);
        REQUIRE(got.shape() == Shape{cout, 2 * h, 2 * w});
        REQUIRE(testing::max_abs_diff(got, want) <= 1e-5);
    }

    const Tensor x = testing::random_tensor(rng, {2, 2, 2});
    const Tensor wt = testing::random_tensor(rng, {2, 2, 2, 2});
    const Tensor b = testing::random_tensor(rng, {2});
    CHECK(testing::max_abs_diff(kernels::upconv2(x, wt, b), reference::upconv2(x, wt, b)) <= 1e-5);
    CHECK_THROWS_AS(kernels::upconv2(x, Tensor({3, 2, 2, 2}), b), InvalidArgument);
}

TEST_CASE("concat stacks channels and rejects mismatched sizes")
{
    const Tensor a({1, 2, 2}, 1.0f), b({2, 2, 2}, 2.0f);
    const Tensor c = kernels::concat(a, b);
    CHECK(c.shape() == Shape{3, 2, 2});
    CHECK(c.data()[3] == 1.0f);
    CHECK(c.data()[4] == 2.0f);
    CHECK_THROWS_AS(kernels::concat(a, Tensor({1, 2, 4})), InvalidArgument);
}

TEST_CASE("halved-filters layer table")
{
    const auto layers = expected_layers();
    auto find = [&](const std::string& n) {
        for (const auto& l : layers)
            if (l.name == n)
                return l;
        FAIL("missing " << n);
        return LayerSpec{};
    };
    CHECK(find("enc1.conv1").weight == Shape{32, 5, 3, 3});
    CHECK(find("enc2.conv2").weight == Shape{64, 64, 3, 3});
    CHECK(find("enc3.conv1").weight == Shape{128, 64, 3, 3});
    CHECK(find("enc4.conv2").weight == Shape{256, 256, 3, 3});
    CHECK(find("bottleneck.conv1").weight == Shape{512, 256, 3, 3});
    CHECK(find("bottleneck.conv2").weight == Shape{512, 512, 3, 3});
    CHECK(find("dec4.up").weight == Shape{512, 256, 2, 2});
    CHECK(find("dec4.conv1").weight == Shape{256, 512, 3, 3});
    CHECK(find("dec1.up").weight == Shape{64, 32, 2, 2});
    CHECK(find("dec1.conv2").weight == Shape{32, 32, 3, 3});
    CHECK(find("head").weight == Shape{1, 32, 1, 1});
    CHECK(find("head").bias == Shape{1});
    CHECK(layers.size() == 23);
}

TEST_CASE("same-size spatial trace through the tiny network")
{
    const WeightStore ws = tiny_weights();
    auto conv = [&](const Tensor& x, const std::string& l) {
        return kernels::relu(kernels::conv2d(x, ws.at(l + ".weight"), ws.at(l + ".bias"), 1));
    };
    std::vector<std::size_t> trace;
    std::vector<Tensor> skips;
    Tensor x = testing::analytic_input();
    trace.push_back(x.dim(1));
    for (int i = 1; i <= 4; ++i) {
        const std::string s = "enc" + std::to_string(i);
        skips.push_back(conv(conv(x, s + ".conv1"), s + ".conv2"));
        CHECK(skips.back().dim(0) == static_cast<std::size_t>(kTiny.filters(i)));
        x = kernels::maxpool2(skips.back());
        trace.push_back(x.dim(1));
    }
    x = conv(conv(x, "bottleneck.conv1"), "bottleneck.conv2");
    CHECK(x.dim(0) == static_cast<std::size_t>(kTiny.filters(5)));
    for (int i = 4; i >= 1; --i) {
        const std::string s = "dec" + std::to_string(i);
        const Tensor up = kernels::upconv2(x, ws.at(s + ".up.weight"), ws.at(s + ".up.bias"));
        CHECK(up.dim(1) == skips[i - 1].dim(1));
        CHECK(up.dim(2) == skips[i - 1].dim(2));
        x = conv(conv(kernels::concat(up, skips[i - 1]), s + ".conv1"), s + ".conv2");
        trace.push_back(x.dim(1));
    }
    CHECK(trace == std::vector<std::size_t>{128, 64, 32, 16, 8, 16, 32, 64, 128});

    const UNet net(ws);
    CHECK(net.logits(testing::analytic_input()).shape() == Shape{1, 128, 128});
    CHECK(net.logits(testing::analytic_input(5, 32)).shape() == Shape{1, 32, 32});
    CHECK_THROWS_AS(net.logits(testing::analytic_input(5, 40)), InvalidArgument);
    CHECK_THROWS_AS(net.logits(testing::analytic_input(4, 128)), InvalidArgument);
}

TEST_CASE("forward on the tiny fixture reproduces the frozen golden map")
{
    const UNet net(tiny_weights());
    CHECK(net.spec().base_filters == 4);
    const PlaneFile golden = read_plane_file(testing::fixture("tiny_golden.prob.f32"));
    REQUIRE(golden.planes.size() == 1);

    const Tensor prob = kernels::sigmoid(net.logits(testing::analytic_input(), ForwardOptions{true}));
    double worst = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const float v = prob.data()[i];
        REQUIRE(v > 0.0f);
        REQUIRE(v < 1.0f);
        worst = std::max(worst, std::abs(static_cast<double>(v) - golden.planes[0].data()[i]));
    }
    MESSAGE("golden max-abs error " << worst);
    CHECK(worst <= 1e-5);
}

TEST_CASE("forward is independent of the thread count")
{
    const UNet net(tiny_weights());
    std::mt19937 rng(4);
    ChannelStack stack;
    for (auto& p : stack.planes) {
        p = PlaneF32(128, 128);
        std::uniform_real_distribution<float> u(0.0f, 1.0f);
        for (float& v : p.data())
            v = u(rng);
    }
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const ProbMap one = net.forward(stack);
    omp_set_num_threads(4);
    const ProbMap four = net.forward(stack);
    omp_set_num_threads(saved);
    CHECK(one == four);
    CHECK(one.width() == 128);
    CHECK(one.height() == 128);
}

TEST_CASE("non-finite activations are reported with the layer name")
{
    WeightStore ws = tiny_weights();
    ws.at("enc2.conv1.bias").data()[0] = std::numeric_limits<float>::infinity();
    const UNet net(std::move(ws));
    try {
        net.logits(testing::analytic_input(), ForwardOptions{true});
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("enc2.conv1") != std::string::npos);
    }
}

TEST_CASE("thresholding the sigmoid is monotone in the logit")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-8.0f, 8.0f), bump(0.0f, 3.0f);
    for (int i = 0; i < 10000; ++i) {
        const float z = u(rng);
        const float hi = z + bump(rng);
        const Tensor s = kernels::sigmoid(Tensor({2}, std::vector<float>{z, hi}));
        REQUIRE(s.data()[1] >= s.data()[0]);
        if (s.data()[0] >= 0.5f)
            REQUIRE(s.data()[1] >= 0.5f);
    }
}

TEST_CASE("weight file round trip is bit-identical")
{
    const auto bytes = slurp(testing::fixture("tiny_unet.unetw"));
    const WeightStore ws = parse_weights(bytes);
    CHECK(serialize_weights(ws) == bytes);

    const auto dir = testing::scratch_dir("weights");
    save_weights(dir / "copy.unetw", ws);
    CHECK(slurp(dir / "copy.unetw") == bytes);
    const WeightStore back = load_weights(dir / "copy.unetw");
    REQUIRE(back.size() == ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        CHECK(back.entries()[i].first == ws.entries()[i].first);
        CHECK(back.entries()[i].second == ws.entries()[i].second);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("validate accepts the fixture and names each broken layer")
{
    const WeightStore good = tiny_weights();
    CHECK(validate(good, kTiny).empty());
    CHECK(infer_spec(good).base_filters == 4);
    CHECK(good.at("enc1.conv1.weight").dim(1) == 5);

    for (const auto& m : testing::weight_mutations()) {
        CAPTURE(m.description);
        WeightStore bad = good;
        m.apply(bad);
        const auto problems = validate(bad, kTiny);
        CHECK(names(problems, m.layer));
        CHECK_THROWS_AS(UNet(bad, kTiny), WeightFileError);
    }
}

TEST_CASE("deleting one layer lists exactly that layer")
{
    for (const auto& layer : expected_layers(kTiny)) {
        WeightStore ws = tiny_weights();
        ws.erase(layer.name + ".weight");
        ws.erase(layer.name + ".bias");
        const auto problems = validate(ws, kTiny);
        CAPTURE(layer.name);
        REQUIRE(problems.size() == 2);
        CHECK(names(problems, layer.name));
    }
}

TEST_CASE("validate reports every violation, including unexpected tensors")
{
    WeightStore ws = tiny_weights();
    ws.erase("enc2.conv2.bias");
    ws.erase("dec3.up.weight");
    ws.add("extra.weight", Tensor({1}));
    const auto problems = validate(ws, kTiny);
    CHECK(problems.size() == 3);

    try {
        UNet net(ws);
        FAIL("expected WeightFileError");
    } catch (const WeightFileError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("enc2.conv2") != std::string::npos);
        CHECK(msg.find("dec3.up") != std::string::npos);
        CHECK(msg.find("extra") != std::string::npos);
    }

    CHECK(validate(tiny_weights()).size() > 0);  // base 4 is not the standard network
}

TEST_CASE("malformed weight files are rejected")
{
    auto bytes = slurp(testing::fixture("tiny_unet.unetw"));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(parse_weights(bad_magic), doctest::Contains("magic"), WeightFileError);

    auto short_blob = bytes;
    short_blob.resize(bytes.size() - 4);
    CHECK_THROWS_WITH_AS(parse_weights(short_blob), doctest::Contains("length mismatch"), WeightFileError);

    auto long_blob = bytes;
    long_blob.push_back(0);
    CHECK_THROWS_WITH_AS(parse_weights(long_blob), doctest::Contains("length mismatch"), WeightFileError);

    CHECK_THROWS_AS(parse_weights(std::vector<unsigned char>(bytes.begin(), bytes.begin() + 10)), WeightFileError);
    CHECK_THROWS_AS(load_weights(testing::fixture("does_not_exist.unetw")), WeightFileError);

    WeightStore dup;
    dup.add("a.weight", Tensor({1}));
    CHECK_THROWS_AS(dup.add("a.weight", Tensor({1})), InvalidArgument);
}
