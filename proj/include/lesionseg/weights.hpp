#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lesionseg/tensor.hpp"

namespace lesionseg {

/// Malformed or unreadable weight file.
class WeightFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Named tensors in file order. Names are unique.
class WeightStore {
public:
    void add(std::string name, Tensor tensor);
    bool erase(const std::string& name);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    const Tensor& at(const std::string& name) const;
    Tensor& at(const std::string& name);
    const Tensor* find(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::map<std::string, std::size_t> index_;
};

// File layout, all integers little-endian:
//   7 bytes   magic "UNETW1\0"
//   8 bytes   u64 manifest length N
//   N bytes   UTF-8 JSON array of {name, shape, dtype:"f32", offset, byte_len}
//   rest      blob; offsets are relative to its first byte
inline constexpr char kWeightMagic[7] = {'U', 'N', 'E', 'T', 'W', '1', '\0'};

WeightStore load_weights(const std::filesystem::path& path);
WeightStore parse_weights(const std::vector<unsigned char>& bytes);
void save_weights(const std::filesystem::path& path, const WeightStore& store);
std::vector<unsigned char> serialize_weights(const WeightStore& store);

/// Shape parameters of the U-Net. The standard network has 32 filters in
/// its first stage, doubling per stage to a 512-filter bottleneck.
struct UNetSpec {
    int in_channels = 5;
    int base_filters = 32;
    int depth = 4;

    /// Filter count of encoder stage `level` (1-based); level depth+1 is the bottleneck.
    int filters(int level) const { return base_filters << (level - 1); }
};

struct LayerSpec {
    std::string name;
    Shape weight;
    Shape bias;
};

/// Ordered parameter table: enc{i}.conv{1,2}, bottleneck.conv{1,2},
/// dec{i}.up, dec{i}.conv{1,2} for i = depth..1, then head.
/// Tensors are stored as "<layer>.weight" and "<layer>.bias".
std::vector<LayerSpec> expected_layers(const UNetSpec& spec = {});

/// Reads the network width from enc1.conv1.weight; falls back to the
/// standard spec when that tensor is absent or malformed.
UNetSpec infer_spec(const WeightStore& store);

/// Checks the store against the full table and returns one message per
/// violation (missing, misshapen or unexpected tensors). Each message
/// starts with the layer name. Empty means valid.
std::vector<std::string> validate(const WeightStore& store, const UNetSpec& spec = {});

}  // namespace lesionseg
