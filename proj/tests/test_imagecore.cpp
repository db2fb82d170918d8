#include "doctest.h"

#include <fstream>

#include "lesionseg/image.hpp"
#include "lesionseg/png_io.hpp"
#include "test_support.hpp"

using namespace lesionseg;

TEST_CASE("intensity is the mean of R, G and B")
{
    ImageU8 img(3, 1, 3, std::vector<std::uint8_t>{0, 0, 0, 90, 120, 150, 255, 255, 255});
    const PlaneF32 p = intensity(img);
    CHECK(p.at(0, 0) == 0.0f);
    CHECK(p.at(1, 0) == 120.0f);
    CHECK(p.at(2, 0) == 255.0f);
}

TEST_CASE("intensity of a gray pixel is exact")
{
    ImageU8 img(256, 1, 3);
    for (int v = 0; v < 256; ++v)
        for (int c = 0; c < 3; ++c)
            img.at(v, 0, c) = static_cast<std::uint8_t>(v);
    const PlaneF32 p = intensity(img);
    for (int v = 0; v < 256; ++v)
        CHECK(p.at(v, 0) == static_cast<float>(v));
}

TEST_CASE("intensity rejects single-channel input")
{
    CHECK_THROWS_AS(intensity(ImageU8(4, 4, 1)), InvalidArgument);
}

TEST_CASE("image construction enforces its invariants")
{
    CHECK_THROWS_AS(ImageU8(4, 4, 2), InvalidArgument);
    CHECK_THROWS_AS(ImageU8(0, 4, 3), InvalidArgument);
    CHECK_THROWS_AS(ImageU8(2, 2, 3, std::vector<std::uint8_t>(11)), InvalidArgument);
    CHECK_THROWS_AS(PlaneF32(2, 2, std::vector<float>(3)), InvalidArgument);
}

TEST_CASE("quantization rounds half away from zero")
{
    CHECK(quantize_u8(0.5) == 1);
    CHECK(quantize_u8(1.49) == 1);
    CHECK(quantize_u8(2.5) == 3);
    CHECK(quantize_u8(-3.0) == 0);
    CHECK(quantize_u8(300.0) == 255);
}

namespace {

// Direct evaluation of the half-pixel-centre bilinear formula for one sample.
double bilinear_oracle(const PlaneF32& p, int tw, int th, int dx, int dy)
{
    auto src = [](int d, int in, int out) {
        double s = (d + 0.5) * in / out - 0.5;
        return std::min(std::max(s, 0.0), in - 1.0);
    };
    const double sx = src(dx, p.width(), tw);
    const double sy = src(dy, p.height(), th);
    const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
    const int x1 = std::min(x0 + 1, p.width() - 1), y1 = std::min(y0 + 1, p.height() - 1);
    const double fx = sx - x0, fy = sy - y0;
    return (1 - fy) * ((1 - fx) * p.at(x0, y0) + fx * p.at(x1, y0)) + fy * ((1 - fx) * p.at(x0, y1) + fx * p.at(x1, y1));
}

}  // namespace

TEST_CASE("bilinear resize of [0,255] from 2x1 to 4x1")
{
    const PlaneF32 p(2, 1, std::vector<float>{0.0f, 255.0f});
    const PlaneF32 r = resize_bilinear(p, 4, 1);
    // oracle values: src x = -0.25 (clamped), 0.25, 0.75, 1.25 (clamped)
    const double expected[4] = {0.0, 63.75, 191.25, 255.0};
    for (int x = 0; x < 4; ++x) {
        CHECK(r.at(x, 0) == doctest::Approx(bilinear_oracle(p, 4, 1, x, 0)).epsilon(1e-12));
        CHECK(r.at(x, 0) == doctest::Approx(expected[x]).epsilon(1e-12));
    }
}

TEST_CASE("bilinear resize matches the direct formula on random planes")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    for (int trial = 0; trial < 10; ++trial) {
        PlaneF32 p(3 + trial, 5 + trial * 2);
        for (float& v : p.data())
            v = u(rng);
        const int tw = 7 + 3 * trial, th = 4 + trial;
        const PlaneF32 r = resize_bilinear(p, tw, th);
        for (int y = 0; y < th; ++y)
            for (int x = 0; x < tw; ++x)
                REQUIRE(std::abs(r.at(x, y) - bilinear_oracle(p, tw, th, x, y)) < 1e-4);
    }
}

TEST_CASE("bilinear resize: identity, constants and range")
{
    std::mt19937 rng(11);
    const ImageU8 img = testing::random_rgb(rng, 128, 128);
    CHECK(resize_bilinear(img, 128, 128) == img);

    PlaneF32 constant(64, 64, 37.25f);
    const PlaneF32 up = resize_bilinear(constant, 128, 128);
    for (float v : up.data())
        REQUIRE(std::abs(v - 37.25f) <= 1e-6);

    std::uniform_real_distribution<float> u(-20.0f, 80.0f);
    for (int trial = 0; trial < 20; ++trial) {
        PlaneF32 p(5 + trial, 9);
        for (float& v : p.data())
            v = u(rng);
        const auto [lo, hi] = std::minmax_element(p.data().begin(), p.data().end());
        const PlaneF32 r = resize_bilinear(p, 3 + 2 * trial, 17);
        for (float v : r.data()) {
            REQUIRE(v >= *lo - 1e-6);
            REQUIRE(v <= *hi + 1e-6);
        }
    }
}

TEST_CASE("resize rejects non-positive targets")
{
    CHECK_THROWS_AS(resize_bilinear(PlaneF32(4, 4), 0, 4), InvalidArgument);
    CHECK_THROWS_AS(resize_bilinear(ImageU8(4, 4, 3), 4, -1), InvalidArgument);
}

TEST_CASE("PNG round trip is lossless")
{
    const auto dir = testing::scratch_dir("png");
    std::mt19937 rng(3);
    for (int trial = 0; trial < 4; ++trial) {
        const ImageU8 rgb = testing::random_rgb(rng, 17 + trial, 9 + 3 * trial);
        write_image(dir / "rgb.png", rgb);
        const ImageU8 back = read_image(dir / "rgb.png");
        CHECK(back.channels() == 3);
        CHECK(back == rgb);

        ImageU8 gray(13, 21 + trial, 1);
        std::uniform_int_distribution<int> u(0, 255);
        for (auto& v : gray.data())
            v = static_cast<std::uint8_t>(u(rng));
        write_image(dir / "gray.png", gray);
        CHECK(read_image(dir / "gray.png") == gray);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("image read failures are distinct and name the file")
{
    const auto dir = testing::scratch_dir("pngerr");

    auto kind_of = [](const std::filesystem::path& p, auto reader) {
        try {
            reader(p);
        } catch (const ImageIoError& e) {
            CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
            CHECK(e.path() == p);
            return e.kind();
        }
        FAIL("expected ImageIoError");
        return ImageIoError::Kind::Io;
    };
    auto read = [](const std::filesystem::path& p) { return read_image(p); };
    auto read_m = [](const std::filesystem::path& p) { return read_mask(p); };

    CHECK(kind_of(dir / "absent.png", read) == ImageIoError::Kind::Io);

    std::ofstream(dir / "text.png") << "this is not an image";
    CHECK(kind_of(dir / "text.png", read) == ImageIoError::Kind::UnsupportedFormat);

    std::mt19937 rng(5);
    write_image(dir / "full.png", testing::random_rgb(rng, 40, 40));
    {
        std::ifstream in(dir / "full.png", std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream(dir / "cut.png", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    }
    CHECK(kind_of(dir / "cut.png", read) == ImageIoError::Kind::Truncated);

    ImageU8 mask(8, 8, 1, 0);
    mask.at(3, 3) = 255;
    write_image(dir / "ok_mask.png", mask);
    CHECK(read_mask(dir / "ok_mask.png") == mask);

    mask.at(4, 4) = 17;
    write_image(dir / "bad_mask.png", mask);
    CHECK(kind_of(dir / "bad_mask.png", read_m) == ImageIoError::Kind::NonBinaryMask);

    write_image(dir / "rgb_mask.png", ImageU8(4, 4, 3));
    CHECK(kind_of(dir / "rgb_mask.png", read_m) == ImageIoError::Kind::NonBinaryMask);

    std::filesystem::remove_all(dir);
}
