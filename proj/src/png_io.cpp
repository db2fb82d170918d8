#include "lesionseg/png_io.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace lesionseg {

namespace fs = std::filesystem;

ImageIoError::ImageIoError(Kind kind, const fs::path& path, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + path.string() + ": " + detail),
      kind_(kind),
      path_(path)
{
}

const char* to_string(ImageIoError::Kind kind)
{
    switch (kind) {
    case ImageIoError::Kind::Io: return "I/O failure";
    case ImageIoError::Kind::UnsupportedFormat: return "unsupported format";
    case ImageIoError::Kind::Truncated: return "truncated or corrupt file";
    case ImageIoError::Kind::NonBinaryMask: return "non-binary mask";
    }
    return "image error";
}

namespace {

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<unsigned char> slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ImageIoError(ImageIoError::Kind::Io, path, "cannot open for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw ImageIoError(ImageIoError::Kind::Io, path, "read failed");
    return bytes;
}

// RAII wrapper over libpng's simplified API control structure.
struct PngImage {
    png_image img{};
    PngImage()
    {
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

ImageU8 read_image(const fs::path& path)
{
    const auto bytes = slurp(path);
    if (bytes.size() < kPngSignature.size() ||
        std::memcmp(bytes.data(), kPngSignature.data(), kPngSignature.size()) != 0)
        throw ImageIoError(ImageIoError::Kind::UnsupportedFormat, path, "not a PNG file");

    PngImage png;
    if (!png_image_begin_read_from_memory(&png.img, bytes.data(), bytes.size()))
        throw ImageIoError(ImageIoError::Kind::Truncated, path, png.img.message);

    const bool color = (png.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    const int width = static_cast<int>(png.img.width);
    const int height = static_cast<int>(png.img.height);

    std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png.img));
    if (!png_image_finish_read(&png.img, nullptr, data.data(), 0, nullptr))
        throw ImageIoError(ImageIoError::Kind::Truncated, path, png.img.message);
    return ImageU8(width, height, channels, std::move(data));
}

void write_image(const fs::path& path, const ImageU8& img)
{
    PngImage png;
    png.img.width = static_cast<png_uint_32>(img.width());
    png.img.height = static_cast<png_uint_32>(img.height());
    png.img.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(png.img, size, 0, img.data().data(), 0, nullptr))
        throw ImageIoError(ImageIoError::Kind::Io, path, png.img.message);
    std::vector<unsigned char> encoded(size);
    if (!png_image_write_to_memory(&png.img, encoded.data(), &size, 0, img.data().data(), 0, nullptr))
        throw ImageIoError(ImageIoError::Kind::Io, path, png.img.message);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ImageIoError(ImageIoError::Kind::Io, path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(size));
    if (!out)
        throw ImageIoError(ImageIoError::Kind::Io, path, "write failed");
}

ImageU8 read_mask(const fs::path& path)
{
    ImageU8 mask = read_image(path);
    if (mask.channels() != 1)
        throw ImageIoError(ImageIoError::Kind::NonBinaryMask, path, "mask must be single-channel");
    for (std::uint8_t v : mask.data())
        if (v != 0 && v != 255)
            throw ImageIoError(ImageIoError::Kind::NonBinaryMask, path,
                               "sample value " + std::to_string(v) + " is neither 0 nor 255");
    return mask;
}

}  // namespace lesionseg
