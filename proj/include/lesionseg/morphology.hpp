#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lesionseg/error.hpp"

namespace lesionseg {

/// Row-major boolean mask. Stored as bytes (0/1) so kernels can vectorize.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::span<const unsigned char> data() const { return data_; }
    std::span<unsigned char> data() { return data_; }

    std::size_t count() const;

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<unsigned char> data_;
};

// Square structuring element of odd side `se_size`. Pixels outside the mask
// count as background for both operations.
BinaryMask erode(const BinaryMask& m, int se_size);
BinaryMask dilate(const BinaryMask& m, int se_size);
BinaryMask open(const BinaryMask& m, int se_size);
BinaryMask close(const BinaryMask& m, int se_size);

BinaryMask mask_not(const BinaryMask& m);

}  // namespace lesionseg
