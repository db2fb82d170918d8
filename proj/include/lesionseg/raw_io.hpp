#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lesionseg/enhance.hpp"
#include "lesionseg/image.hpp"
#include "lesionseg/unet.hpp"

namespace lesionseg {

class RawIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stack of equally sized float planes as stored on disk:
///   <stem>.<kind>.f32   planes back to back, row-major, little-endian float32
///   <stem>.<kind>.json  {"width","height","planes","order","dtype":"f32",
///                        "byte_order":"little","source_width","source_height"}
/// `source_*` record the dimensions of the image the planes were derived
/// from so masks can be restored to them.
struct PlaneFile {
    std::vector<PlaneF32> planes;
    std::vector<std::string> order;
    int source_width = 0;
    int source_height = 0;
};

inline constexpr const char* kStackKind = "stack";
inline constexpr const char* kProbKind = "prob";

std::filesystem::path plane_data_path(const std::filesystem::path& dir, const std::string& id, const std::string& kind);
std::filesystem::path plane_sidecar_path(const std::filesystem::path& dir, const std::string& id,
                                         const std::string& kind);

void write_plane_file(const std::filesystem::path& dir, const std::string& id, const std::string& kind,
                      const PlaneFile& file);
PlaneFile read_plane_file(const std::filesystem::path& data_path);

PlaneFile stack_file(const ChannelStack& stack, int source_width, int source_height);
ChannelStack to_stack(const PlaneFile& file);
PlaneFile prob_file(const ProbMap& map, int source_width, int source_height);

}  // namespace lesionseg
