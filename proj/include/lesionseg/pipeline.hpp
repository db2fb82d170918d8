#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lesionseg/enhance.hpp"
#include "lesionseg/metrics.hpp"
#include "lesionseg/postprocess.hpp"

namespace lesionseg {

/// Raised before any image is touched when the run configuration is unusable.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::vector<std::filesystem::path> input_dirs;  ///< exactly one, except for `ensemble`
    std::optional<std::filesystem::path> mask_dir;
    std::vector<std::filesystem::path> weights;     ///< ensemble members
    std::filesystem::path output_dir;
    PostprocessConfig postprocess;
    MetricsConfig metrics;
    TextureConfig texture;
    double ldr_alpha = 2.5;
    int threads = 1;

    EnhanceConfig enhance() const { return {ldr_alpha, texture}; }
};

struct ImageRecord {
    std::string id;
    int width = 0;
    int height = 0;
    double seconds = 0.0;
    std::vector<std::string> outputs;
};

struct CommandResult {
    std::vector<ImageRecord> images;  ///< successfully processed, sorted by id
    std::vector<MetricsFailure> failures;
    std::optional<MetricsReport> report;

    bool ok() const { return failures.empty(); }
};

CommandResult cmd_preprocess(const RunConfig& cfg);
CommandResult cmd_infer(const RunConfig& cfg);
CommandResult cmd_postprocess(const RunConfig& cfg);
CommandResult cmd_ensemble(const RunConfig& cfg);
CommandResult cmd_evaluate(const RunConfig& cfg);

/// build_stack -> forward per weight file -> ensemble_average ->
/// postprocess at the original size -> optional scoring against mask_dir.
/// Writes <id>.png masks, report.csv/report.json (with masks) and
/// manifest.json into output_dir.
CommandResult cmd_pipeline(const RunConfig& cfg);

/// Flat key = value text accepted by the CLI's --config option.
std::string config_text(const RunConfig& cfg);

}  // namespace lesionseg
