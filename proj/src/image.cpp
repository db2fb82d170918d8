#include "lesionseg/image.hpp"

#include <algorithm>
#include <cmath>

namespace lesionseg {

namespace {

void check_dims(int width, int height)
{
    if (width < 1 || height < 1)
        throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
}

struct Tap {
    int lo;
    int hi;
    double frac;
};

// Precomputed source taps for one axis.
std::vector<Tap> axis_taps(int in, int out)
{
    std::vector<Tap> taps(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
        double s = (d + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in - 1));
        const int lo = static_cast<int>(std::floor(s));
        const int hi = std::min(lo + 1, in - 1);
        taps[d] = {lo, hi, s - lo};
    }
    return taps;
}

}  // namespace

ImageU8::ImageU8(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels)
{
    check_dims(width, height);
    if (channels != 1 && channels != 3)
        throw InvalidArgument("channels must be 1 or 3, got " + std::to_string(channels));
    data_.assign(pixel_count() * channels, fill);
}

ImageU8::ImageU8(int width, int height, int channels, std::vector<std::uint8_t> data)
    : ImageU8(width, height, channels)
{
    if (data.size() != data_.size())
        throw InvalidArgument("image data length " + std::to_string(data.size()) +
                              " does not match " + std::to_string(data_.size()));
    data_ = std::move(data);
}

PlaneF32::PlaneF32(int width, int height, float fill) : width_(width), height_(height)
{
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

PlaneF32::PlaneF32(int width, int height, std::vector<float> data) : PlaneF32(width, height)
{
    if (data.size() != data_.size())
        throw InvalidArgument("plane data length " + std::to_string(data.size()) +
                              " does not match " + std::to_string(data_.size()));
    data_ = std::move(data);
}

std::uint8_t quantize_u8(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

PlaneF32 intensity(const ImageU8& img)
{
    if (img.channels() != 3)
        throw InvalidArgument("intensity requires a 3-channel image");
    PlaneF32 out(img.width(), img.height());
    auto src = img.data();
    auto dst = out.data();
    const auto n = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const int sum = src[3 * i] + src[3 * i + 1] + src[3 * i + 2];
        dst[i] = static_cast<float>(sum / 3.0);
    }
    return out;
}

std::vector<PlaneF32> split_channels(const ImageU8& img)
{
    if (img.channels() != 3)
        throw InvalidArgument("split_channels requires a 3-channel image");
    std::vector<PlaneF32> planes(3, PlaneF32(img.width(), img.height()));
    auto src = img.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        for (int c = 0; c < 3; ++c)
            planes[c].data()[i] = src[3 * i + c];
    return planes;
}

PlaneF32 resize_bilinear(const PlaneF32& plane, int target_w, int target_h)
{
    check_dims(target_w, target_h);
    const auto xs = axis_taps(plane.width(), target_w);
    const auto ys = axis_taps(plane.height(), target_h);
    PlaneF32 out(target_w, target_h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < target_h; ++y) {
        const Tap ty = ys[y];
        for (int x = 0; x < target_w; ++x) {
            const Tap tx = xs[x];
            const double top = plane.at(tx.lo, ty.lo) * (1.0 - tx.frac) + plane.at(tx.hi, ty.lo) * tx.frac;
            const double bot = plane.at(tx.lo, ty.hi) * (1.0 - tx.frac) + plane.at(tx.hi, ty.hi) * tx.frac;
            out.at(x, y) = static_cast<float>(top * (1.0 - ty.frac) + bot * ty.frac);
        }
    }
    return out;
}

ImageU8 resize_bilinear(const ImageU8& img, int target_w, int target_h)
{
    check_dims(target_w, target_h);
    const auto xs = axis_taps(img.width(), target_w);
    const auto ys = axis_taps(img.height(), target_h);
    ImageU8 out(target_w, target_h, img.channels());
    const int channels = img.channels();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < target_h; ++y) {
        const Tap ty = ys[y];
        for (int x = 0; x < target_w; ++x) {
            const Tap tx = xs[x];
            for (int c = 0; c < channels; ++c) {
                const double top = img.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo, c) * tx.frac;
                const double bot = img.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi, c) * tx.frac;
                out.at(x, y, c) = quantize_u8(top * (1.0 - ty.frac) + bot * ty.frac);
            }
        }
    }
    return out;
}

}  // namespace lesionseg
