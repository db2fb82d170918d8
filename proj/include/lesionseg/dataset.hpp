#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace lesionseg {

/// File stem with a trailing "_segmentation" removed, so ISIC ground-truth
/// names pair with their images.
std::string image_id_of(const std::filesystem::path& file);

/// Maps image id -> path for every regular file in `dir` whose name ends
/// with `suffix`. Throws InvalidArgument when two files share an id.
std::map<std::string, std::filesystem::path> index_directory(const std::filesystem::path& dir,
                                                             const std::string& suffix);

}  // namespace lesionseg
