#include "lesionseg/dataset.hpp"

#include "lesionseg/error.hpp"

namespace lesionseg {

namespace fs = std::filesystem;

std::string image_id_of(const fs::path& file)
{
    std::string name = file.filename().string();
    for (const char* ext : {".prob.f32", ".stack.f32", ".png"}) {
        const std::string e(ext);
        if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
            name.resize(name.size() - e.size());
            break;
        }
    }
    const std::string tag = "_segmentation";
    if (name.size() > tag.size() && name.compare(name.size() - tag.size(), tag.size(), tag) == 0)
        name.resize(name.size() - tag.size());
    return name;
}

std::map<std::string, fs::path> index_directory(const fs::path& dir, const std::string& suffix)
{
    if (!fs::is_directory(dir))
        throw InvalidArgument("not a directory: " + dir.string());
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string name = entry.path().filename().string();
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        const std::string id = image_id_of(entry.path());
        const auto [it, inserted] = out.emplace(id, entry.path());
        if (!inserted)
            throw InvalidArgument("ambiguous image id '" + id + "': " + it->second.filename().string() + " and " +
                                  name + " in " + dir.string());
    }
    return out;
}

}  // namespace lesionseg
