#include "lesionseg/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "lesionseg/error.hpp"

namespace lesionseg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

constexpr std::size_t kHeaderSize = sizeof(kWeightMagic) + sizeof(std::uint64_t);

std::string layer_of(const std::string& tensor_name)
{
    const auto dot = tensor_name.rfind('.');
    return dot == std::string::npos ? tensor_name : tensor_name.substr(0, dot);
}

}  // namespace

void WeightStore::add(std::string name, Tensor tensor)
{
    if (contains(name))
        throw InvalidArgument("duplicate tensor name: " + name);
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(tensor));
}

bool WeightStore::erase(const std::string& name)
{
    const auto it = index_.find(name);
    if (it == index_.end())
        return false;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i)
        index_.emplace(entries_[i].first, i);
    return true;
}

const Tensor& WeightStore::at(const std::string& name) const
{
    const Tensor* t = find(name);
    if (!t)
        throw InvalidArgument("missing tensor: " + name);
    return *t;
}

Tensor& WeightStore::at(const std::string& name)
{
    return const_cast<Tensor&>(std::as_const(*this).at(name));
}

const Tensor* WeightStore::find(const std::string& name) const
{
    const auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
}

WeightStore parse_weights(const std::vector<unsigned char>& bytes)
{
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kWeightMagic, sizeof(kWeightMagic)) != 0)
        throw WeightFileError("bad magic: not a UNETW1 weight file");

    std::uint64_t manifest_len = 0;
    std::memcpy(&manifest_len, bytes.data() + sizeof(kWeightMagic), sizeof(manifest_len));
    manifest_len = byteswap_if_big(manifest_len);
    if (manifest_len > bytes.size() - kHeaderSize)
        throw WeightFileError("manifest length " + std::to_string(manifest_len) + " exceeds file size");

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + kHeaderSize,
                               bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + manifest_len));
    } catch (const json::parse_error& e) {
        throw WeightFileError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.is_array())
        throw WeightFileError("manifest must be a JSON array");

    const unsigned char* blob = bytes.data() + kHeaderSize + manifest_len;
    const std::size_t blob_len = bytes.size() - kHeaderSize - manifest_len;
    std::size_t extent = 0;

    WeightStore store;
    for (const auto& entry : manifest) {
        std::string name;
        Shape shape;
        std::size_t offset = 0;
        std::size_t byte_len = 0;
        try {
            name = entry.at("name").get<std::string>();
            shape = entry.at("shape").get<Shape>();
            offset = entry.at("offset").get<std::size_t>();
            byte_len = entry.at("byte_len").get<std::size_t>();
            if (entry.at("dtype").get<std::string>() != "f32")
                throw WeightFileError(name + ": unsupported dtype " + entry.at("dtype").dump());
        } catch (const json::exception& e) {
            throw WeightFileError(std::string("malformed manifest entry: ") + e.what());
        }
        const std::size_t count = element_count(shape);
        if (byte_len != count * sizeof(float))
            throw WeightFileError(name + ": byte_len " + std::to_string(byte_len) + " does not match shape " +
                                  shape_string(shape));
        if (offset > blob_len || byte_len > blob_len - offset)
            throw WeightFileError(name + ": manifest/blob length mismatch (tensor ends past blob of " +
                                  std::to_string(blob_len) + " bytes)");
        extent = std::max(extent, offset + byte_len);

        std::vector<float> data(count);
        std::memcpy(data.data(), blob + offset, byte_len);
        for (float& v : data)
            v = byteswap_if_big(v);
        if (store.contains(name))
            throw WeightFileError("duplicate tensor name in manifest: " + name);
        store.add(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    if (extent != blob_len)
        throw WeightFileError("manifest/blob length mismatch: manifest covers " + std::to_string(extent) +
                              " bytes, blob holds " + std::to_string(blob_len));
    return store;
}

WeightStore load_weights(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw WeightFileError("cannot open weight file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_weights(bytes);
    } catch (const WeightFileError& e) {
        throw WeightFileError(path.string() + ": " + e.what());
    }
}

std::vector<unsigned char> serialize_weights(const WeightStore& store)
{
    json manifest = json::array();
    std::size_t offset = 0;
    for (const auto& [name, tensor] : store.entries()) {
        const std::size_t byte_len = tensor.size() * sizeof(float);
        manifest.push_back({{"name", name},
                            {"shape", tensor.shape()},
                            {"dtype", "f32"},
                            {"offset", offset},
                            {"byte_len", byte_len}});
        offset += byte_len;
    }
    const std::string text = manifest.dump();

    std::vector<unsigned char> bytes(kHeaderSize + text.size() + offset);
    std::memcpy(bytes.data(), kWeightMagic, sizeof(kWeightMagic));
    const std::uint64_t len = byteswap_if_big(static_cast<std::uint64_t>(text.size()));
    std::memcpy(bytes.data() + sizeof(kWeightMagic), &len, sizeof(len));
    std::memcpy(bytes.data() + kHeaderSize, text.data(), text.size());

    unsigned char* blob = bytes.data() + kHeaderSize + text.size();
    for (const auto& [name, tensor] : store.entries()) {
        for (float v : tensor.data()) {
            v = byteswap_if_big(v);
            std::memcpy(blob, &v, sizeof(float));
            blob += sizeof(float);
        }
    }
    return bytes;
}

void save_weights(const fs::path& path, const WeightStore& store)
{
    const auto bytes = serialize_weights(store);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw WeightFileError("cannot open weight file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw WeightFileError("write failed: " + path.string());
}

std::vector<LayerSpec> expected_layers(const UNetSpec& spec)
{
    auto conv = [](std::string name, int cout, int cin, int k) {
        const auto co = static_cast<std::size_t>(cout);
        return LayerSpec{std::move(name), {co, static_cast<std::size_t>(cin), std::size_t(k), std::size_t(k)}, {co}};
    };

    std::vector<LayerSpec> layers;
    int in = spec.in_channels;
    for (int i = 1; i <= spec.depth; ++i) {
        const int f = spec.filters(i);
        layers.push_back(conv("enc" + std::to_string(i) + ".conv1", f, in, 3));
        layers.push_back(conv("enc" + std::to_string(i) + ".conv2", f, f, 3));
        in = f;
    }
    const int bottom = spec.filters(spec.depth + 1);
    layers.push_back(conv("bottleneck.conv1", bottom, in, 3));
    layers.push_back(conv("bottleneck.conv2", bottom, bottom, 3));
    in = bottom;
    for (int i = spec.depth; i >= 1; --i) {
        const int f = spec.filters(i);
        const std::string stage = "dec" + std::to_string(i);
        layers.push_back(LayerSpec{stage + ".up",
                                   {static_cast<std::size_t>(in), static_cast<std::size_t>(f), 2, 2},
                                   {static_cast<std::size_t>(f)}});
        layers.push_back(conv(stage + ".conv1", f, 2 * f, 3));
        layers.push_back(conv(stage + ".conv2", f, f, 3));
        in = f;
    }
    layers.push_back(conv("head", 1, in, 1));
    return layers;
}

UNetSpec infer_spec(const WeightStore& store)
{
    UNetSpec spec;
    if (const Tensor* t = store.find("enc1.conv1.weight"); t && t->rank() == 4 && t->dim(0) > 0)
        spec.base_filters = static_cast<int>(t->dim(0));
    return spec;
}

std::vector<std::string> validate(const WeightStore& store, const UNetSpec& spec)
{
    std::vector<std::string> problems;
    std::set<std::string> known;
    for (const auto& layer : expected_layers(spec)) {
        for (const auto& [suffix, shape] : {std::pair{".weight", layer.weight}, std::pair{".bias", layer.bias}}) {
            const std::string name = layer.name + suffix;
            known.insert(name);
            const Tensor* t = store.find(name);
            if (!t) {
                problems.push_back(layer.name + ": missing tensor " + name);
            } else if (t->shape() != shape) {
                problems.push_back(layer.name + ": tensor " + name + " has shape " + shape_string(t->shape()) +
                                   ", expected " + shape_string(shape));
            }
        }
    }
    for (const auto& [name, tensor] : store.entries())
        if (!known.count(name))
            problems.push_back(layer_of(name) + ": unexpected tensor " + name);
    return problems;
}

}  // namespace lesionseg
