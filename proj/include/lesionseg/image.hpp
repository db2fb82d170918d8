#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesionseg/error.hpp"

namespace lesionseg {

/// Interleaved 8-bit image, row-major, 1 (gray) or 3 (RGB) channels.
class ImageU8 {
public:
    ImageU8() = default;
    ImageU8(int width, int height, int channels, std::uint8_t fill = 0);
    ImageU8(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    bool operator==(const ImageU8&) const = default;

private:
    std::size_t index(int x, int y, int c) const
    {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

/// Single float plane, row-major. Samples are expected to be finite.
class PlaneF32 {
public:
    PlaneF32() = default;
    PlaneF32(int width, int height, float fill = 0.0f);
    PlaneF32(int width, int height, std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    bool operator==(const PlaneF32&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Round half away from zero and clamp into [0,255].
std::uint8_t quantize_u8(double v);

/// Per-pixel mean of R, G and B. Rejects non-RGB input.
PlaneF32 intensity(const ImageU8& img);

/// Split an RGB image into three float planes (R, G, B), values in [0,255].
std::vector<PlaneF32> split_channels(const ImageU8& img);

/// Bilinear resize using the half-pixel-centre mapping
/// src = (dst + 0.5) * (in / out) - 0.5, clamped to the image edge.
PlaneF32 resize_bilinear(const PlaneF32& plane, int target_w, int target_h);
ImageU8 resize_bilinear(const ImageU8& img, int target_w, int target_h);

}  // namespace lesionseg
