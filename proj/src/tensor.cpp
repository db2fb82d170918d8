#include "lesionseg/tensor.hpp"

#include <cmath>

#include "lesionseg/error.hpp"

namespace lesionseg {

std::size_t element_count(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

std::string shape_string(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape))
{
    data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data))
{
    if (data_.size() != element_count(shape_))
        throw InvalidArgument("tensor data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string(shape_));
}

std::size_t Tensor::first_non_finite() const
{
    for (std::size_t i = 0; i < data_.size(); ++i)
        if (!std::isfinite(data_[i]))
            return i;
    return data_.size();
}

}  // namespace lesionseg
