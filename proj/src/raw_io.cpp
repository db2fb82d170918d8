#include "lesionseg/raw_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace lesionseg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "raw plane files assume a little-endian host");

fs::path plane_data_path(const fs::path& dir, const std::string& id, const std::string& kind)
{
    return dir / (id + "." + kind + ".f32");
}

fs::path plane_sidecar_path(const fs::path& dir, const std::string& id, const std::string& kind)
{
    return dir / (id + "." + kind + ".json");
}

void write_plane_file(const fs::path& dir, const std::string& id, const std::string& kind, const PlaneFile& file)
{
    if (file.planes.empty())
        throw RawIoError("no planes to write for " + id);
    const int w = file.planes.front().width();
    const int h = file.planes.front().height();

    const fs::path data_path = plane_data_path(dir, id, kind);
    std::ofstream data(data_path, std::ios::binary | std::ios::trunc);
    if (!data)
        throw RawIoError("cannot open for writing: " + data_path.string());
    for (const auto& p : file.planes) {
        if (p.width() != w || p.height() != h)
            throw RawIoError("planes differ in size for " + id);
        data.write(reinterpret_cast<const char*>(p.data().data()), static_cast<std::streamsize>(p.size() * sizeof(float)));
    }
    if (!data)
        throw RawIoError("write failed: " + data_path.string());

    json side = {{"width", w},
                 {"height", h},
                 {"planes", file.planes.size()},
                 {"order", file.order},
                 {"dtype", "f32"},
                 {"byte_order", "little"},
                 {"source_width", file.source_width},
                 {"source_height", file.source_height}};
    const fs::path side_path = plane_sidecar_path(dir, id, kind);
    std::ofstream sidecar(side_path, std::ios::trunc);
    sidecar << side.dump(2) << "\n";
    if (!sidecar)
        throw RawIoError("write failed: " + side_path.string());
}

PlaneFile read_plane_file(const fs::path& data_path)
{
    fs::path side_path = data_path;
    side_path.replace_extension(".json");
    std::ifstream sidecar(side_path);
    if (!sidecar)
        throw RawIoError("missing sidecar: " + side_path.string());

    PlaneFile file;
    int w = 0;
    int h = 0;
    std::size_t count = 0;
    try {
        const json side = json::parse(sidecar);
        w = side.at("width").get<int>();
        h = side.at("height").get<int>();
        count = side.at("planes").get<std::size_t>();
        file.order = side.at("order").get<std::vector<std::string>>();
        file.source_width = side.value("source_width", w);
        file.source_height = side.value("source_height", h);
        if (side.value("dtype", "f32") != "f32" || side.value("byte_order", "little") != "little")
            throw RawIoError("unsupported dtype or byte order in " + side_path.string());
    } catch (const json::exception& e) {
        throw RawIoError("malformed sidecar " + side_path.string() + ": " + e.what());
    }
    if (w < 1 || h < 1 || count < 1)
        throw RawIoError("invalid dimensions in " + side_path.string());

    std::ifstream data(data_path, std::ios::binary | std::ios::ate);
    if (!data)
        throw RawIoError("cannot open: " + data_path.string());
    const auto plane_len = static_cast<std::size_t>(w) * h;
    const auto expected = static_cast<std::streamoff>(plane_len * count * sizeof(float));
    if (data.tellg() != expected)
        throw RawIoError(data_path.string() + ": size " + std::to_string(data.tellg()) + " bytes, sidecar implies " +
                         std::to_string(expected));
    data.seekg(0);
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<float> v(plane_len);
        data.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(plane_len * sizeof(float)));
        file.planes.emplace_back(w, h, std::move(v));
    }
    if (!data)
        throw RawIoError("read failed: " + data_path.string());
    return file;
}

PlaneFile stack_file(const ChannelStack& stack, int source_width, int source_height)
{
    PlaneFile f;
    f.planes.assign(stack.planes.begin(), stack.planes.end());
    f.order.assign(kStackOrder.begin(), kStackOrder.end());
    f.source_width = source_width;
    f.source_height = source_height;
    return f;
}

ChannelStack to_stack(const PlaneFile& file)
{
    if (file.planes.size() != kStackPlanes)
        throw RawIoError("channel stack needs " + std::to_string(kStackPlanes) + " planes, got " +
                         std::to_string(file.planes.size()));
    for (std::size_t i = 0; i < kStackPlanes; ++i)
        if (i >= file.order.size() || file.order[i] != kStackOrder[i])
            throw RawIoError(std::string("channel stack order mismatch at plane ") + std::to_string(i) +
                             ", expected " + kStackOrder[i]);
    ChannelStack s;
    for (std::size_t i = 0; i < kStackPlanes; ++i)
        s.planes[i] = file.planes[i];
    return s;
}

PlaneFile prob_file(const ProbMap& map, int source_width, int source_height)
{
    return PlaneFile{{map}, {"probability"}, source_width, source_height};
}

}  // namespace lesionseg
