#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lesionseg {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float32 array.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    const Shape& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }
    const float* ptr() const { return data_.data(); }
    float* ptr() { return data_.data(); }

    /// First non-finite element index, or size() when all are finite.
    std::size_t first_non_finite() const;

    bool operator==(const Tensor&) const = default;

private:
    Shape shape_;
    std::vector<float> data_;
};

}  // namespace lesionseg
