#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "lesionseg/image.hpp"

namespace lesionseg {

/// Failure while reading or writing an image file. `kind()` tells the
/// caller which of the failure modes occurred; `path()` names the file.
class ImageIoError : public std::runtime_error {
public:
    enum class Kind { Io, UnsupportedFormat, Truncated, NonBinaryMask };

    ImageIoError(Kind kind, const std::filesystem::path& path, const std::string& detail);

    Kind kind() const { return kind_; }
    const std::filesystem::path& path() const { return path_; }

private:
    Kind kind_;
    std::filesystem::path path_;
};

const char* to_string(ImageIoError::Kind kind);

/// Reads any standard PNG. Color sources become 3-channel RGB, gray sources
/// 1-channel; alpha is dropped and 16-bit samples are reduced to 8 bits.
ImageU8 read_image(const std::filesystem::path& path);

/// Writes an 8-bit, non-interlaced PNG (gray or RGB).
void write_image(const std::filesystem::path& path, const ImageU8& img);

/// Reads a segmentation mask: a 1-channel PNG whose samples are all 0 or 255.
ImageU8 read_mask(const std::filesystem::path& path);

}  // namespace lesionseg
