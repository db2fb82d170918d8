#include "lesionseg/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "lesionseg/dataset.hpp"
#include "lesionseg/png_io.hpp"
#include "lesionseg/raw_io.hpp"
#include "lesionseg/unet.hpp"
#include "lesionseg/weights.hpp"

#ifndef LESIONSEG_VERSION
#define LESIONSEG_VERSION "dev"
#endif

namespace lesionseg {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    std::optional<ImageRecord> record;
    std::optional<MetricsRow> row;
    std::string error;
};

void validate_common(const RunConfig& cfg)
{
    if (cfg.threads < 1)
        throw ConfigError("threads must be >= 1");
    try {
        cfg.postprocess.validate();
        cfg.metrics.validate();
        cfg.texture.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.ldr_alpha < 0.0)
        throw ConfigError("ldr-alpha must be non-negative");
    if (cfg.output_dir.empty())
        throw ConfigError("--output-dir is required");
    if (cfg.mask_dir && !fs::is_directory(*cfg.mask_dir))
        throw ConfigError("mask directory does not exist: " + cfg.mask_dir->string());
}

const fs::path& single_input(const RunConfig& cfg)
{
    if (cfg.input_dirs.size() != 1)
        throw ConfigError("exactly one --input-dir is required");
    if (!fs::is_directory(cfg.input_dirs.front()))
        throw ConfigError("input directory does not exist: " + cfg.input_dirs.front().string());
    return cfg.input_dirs.front();
}

std::vector<UNet> load_networks(const RunConfig& cfg)
{
    if (cfg.weights.empty())
        throw ConfigError("at least one --weights file is required");
    std::vector<UNet> nets;
    for (const auto& path : cfg.weights) {
        if (!fs::is_regular_file(path))
            throw ConfigError("weight file does not exist: " + path.string());
        try {
            nets.emplace_back(load_weights(path));
        } catch (const std::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return nets;
}

std::map<std::string, fs::path> list_inputs(const fs::path& dir, const std::string& suffix)
{
    try {
        return index_directory(dir, suffix);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

void prepare_output(const RunConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec || !fs::is_directory(cfg.output_dir))
        throw ConfigError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
}

// Images are spread over the worker pool when there are enough of them;
// otherwise they run one at a time and the kernels use the threads instead.
// Kernels are thread-count invariant, so both schedules give identical bytes.
template <typename Fn>
std::vector<Outcome> run_images(const std::vector<std::pair<std::string, fs::path>>& items, int threads, Fn&& fn)
{
    omp_set_num_threads(threads);
    std::vector<Outcome> out(items.size());
    auto one = [&](std::size_t i) {
        const auto start = Clock::now();
        try {
            out[i] = fn(items[i].first, items[i].second);
            if (out[i].record)
                out[i].record->seconds = std::chrono::duration<double>(Clock::now() - start).count();
        } catch (const std::exception& e) {
            out[i] = Outcome{};
            out[i].error = e.what();
        }
    };
    const auto n = static_cast<std::ptrdiff_t>(items.size());
    if (threads > 1 && n >= threads) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            one(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            one(static_cast<std::size_t>(i));
    }
    return out;
}

CommandResult collect(const std::vector<std::pair<std::string, fs::path>>& items, std::vector<Outcome> outcomes)
{
    CommandResult result;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].record)
            result.images.push_back(std::move(*outcomes[i].record));
        else
            result.failures.push_back({items[i].first, outcomes[i].error});
    }
    return result;
}

std::vector<std::pair<std::string, fs::path>> as_items(const std::map<std::string, fs::path>& m)
{
    return {m.begin(), m.end()};
}

ImageU8 read_rgb(const fs::path& path)
{
    ImageU8 img = read_image(path);
    if (img.channels() != 3)
        throw InvalidArgument("input is not an RGB image: " + path.string());
    return img;
}

ProbMap infer_ensemble(const std::vector<UNet>& nets, const ChannelStack& stack)
{
    std::vector<ProbMap> maps;
    maps.reserve(nets.size());
    for (const auto& net : nets)
        maps.push_back(net.forward(stack));
    return maps.size() == 1 ? std::move(maps.front()) : ensemble_average(maps);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

CommandResult cmd_preprocess(const RunConfig& cfg)
{
    validate_common(cfg);
    const auto items = as_items(list_inputs(single_input(cfg), ".png"));
    prepare_output(cfg);
    const EnhanceConfig enhance = cfg.enhance();
    return collect(items, run_images(items, cfg.threads, [&](const std::string& id, const fs::path& path) {
        const ImageU8 img = read_rgb(path);
        write_plane_file(cfg.output_dir, id, kStackKind, stack_file(build_stack(img, enhance), img.width(), img.height()));
        Outcome o;
        o.record = ImageRecord{id, img.width(), img.height(), 0.0,
                               {plane_data_path({}, id, kStackKind).string(), plane_sidecar_path({}, id, kStackKind).string()}};
        return o;
    }));
}

CommandResult cmd_infer(const RunConfig& cfg)
{
    validate_common(cfg);
    const auto items = as_items(list_inputs(single_input(cfg), ".stack.f32"));
    const auto nets = load_networks(cfg);
    prepare_output(cfg);
    return collect(items, run_images(items, cfg.threads, [&](const std::string& id, const fs::path& path) {
        const PlaneFile in = read_plane_file(path);
        const ProbMap map = infer_ensemble(nets, to_stack(in));
        write_plane_file(cfg.output_dir, id, kProbKind, prob_file(map, in.source_width, in.source_height));
        Outcome o;
        o.record = ImageRecord{id, in.source_width, in.source_height, 0.0,
                               {plane_data_path({}, id, kProbKind).string(), plane_sidecar_path({}, id, kProbKind).string()}};
        return o;
    }));
}

CommandResult cmd_postprocess(const RunConfig& cfg)
{
    validate_common(cfg);
    const auto items = as_items(list_inputs(single_input(cfg), ".prob.f32"));
    prepare_output(cfg);
    return collect(items, run_images(items, cfg.threads, [&](const std::string& id, const fs::path& path) {
        const PlaneFile in = read_plane_file(path);
        if (in.planes.size() != 1)
            throw RawIoError("probability file must hold one plane: " + path.string());
        const BinaryMask mask = postprocess(in.planes.front(), cfg.postprocess, in.source_width, in.source_height);
        write_image(cfg.output_dir / (id + ".png"), mask_to_image(mask));
        Outcome o;
        o.record = ImageRecord{id, in.source_width, in.source_height, 0.0, {id + ".png"}};
        return o;
    }));
}

CommandResult cmd_ensemble(const RunConfig& cfg)
{
    validate_common(cfg);
    if (cfg.input_dirs.empty())
        throw ConfigError("ensemble needs at least one --input-dir");
    std::vector<std::map<std::string, fs::path>> members;
    std::map<std::string, fs::path> ids;
    for (const auto& dir : cfg.input_dirs) {
        if (!fs::is_directory(dir))
            throw ConfigError("input directory does not exist: " + dir.string());
        members.push_back(list_inputs(dir, ".prob.f32"));
        for (const auto& [id, path] : members.back())
            ids.emplace(id, path);
    }
    prepare_output(cfg);
    const auto items = as_items(ids);
    return collect(items, run_images(items, cfg.threads, [&](const std::string& id, const fs::path&) {
        std::vector<ProbMap> maps;
        int sw = 0;
        int sh = 0;
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto it = members[k].find(id);
            if (it == members[k].end())
                throw RawIoError("missing from " + cfg.input_dirs[k].string());
            PlaneFile f = read_plane_file(it->second);
            if (f.planes.size() != 1)
                throw RawIoError("probability file must hold one plane: " + it->second.string());
            if (k == 0) {
                sw = f.source_width;
                sh = f.source_height;
            } else if (f.source_width != sw || f.source_height != sh) {
                throw RawIoError("source dimensions disagree across ensemble members");
            }
            maps.push_back(std::move(f.planes.front()));
        }
        write_plane_file(cfg.output_dir, id, kProbKind, prob_file(ensemble_average(maps), sw, sh));
        Outcome o;
        o.record = ImageRecord{id, sw, sh, 0.0,
                               {plane_data_path({}, id, kProbKind).string(), plane_sidecar_path({}, id, kProbKind).string()}};
        return o;
    }));
}

CommandResult cmd_evaluate(const RunConfig& cfg)
{
    validate_common(cfg);
    const fs::path& pred_dir = single_input(cfg);
    if (!cfg.mask_dir)
        throw ConfigError("evaluate needs --mask-dir");
    list_inputs(pred_dir, ".png");
    list_inputs(*cfg.mask_dir, ".png");
    prepare_output(cfg);

    CommandResult result;
    result.report = evaluate(pred_dir, *cfg.mask_dir, cfg.metrics);
    write_text(cfg.output_dir / "report.csv", result.report->to_csv());
    write_text(cfg.output_dir / "report.json", result.report->to_json());
    result.failures = result.report->failures;
    for (const auto& row : result.report->rows)
        result.images.push_back(ImageRecord{row.image_id, 0, 0, 0.0, {}});
    return result;
}

CommandResult cmd_pipeline(const RunConfig& cfg)
{
    validate_common(cfg);
    const auto items = as_items(list_inputs(single_input(cfg), ".png"));
    std::map<std::string, fs::path> gts;
    if (cfg.mask_dir)
        gts = list_inputs(*cfg.mask_dir, ".png");
    const auto nets = load_networks(cfg);
    prepare_output(cfg);
    const EnhanceConfig enhance = cfg.enhance();

    auto outcomes = run_images(items, cfg.threads, [&](const std::string& id, const fs::path& path) {
        const ImageU8 img = read_rgb(path);
        const ProbMap map = infer_ensemble(nets, build_stack(img, enhance));
        const BinaryMask mask = postprocess(map, cfg.postprocess, img.width(), img.height());
        const std::string name = id + ".png";
        write_image(cfg.output_dir / name, mask_to_image(mask));
        Outcome o;
        o.record = ImageRecord{id, img.width(), img.height(), 0.0, {name}};
        if (const auto gt = gts.find(id); gt != gts.end())
            o.row = score_pair(id, mask, image_to_mask(read_mask(gt->second)), cfg.metrics);
        return o;
    });

    std::vector<MetricsRow> rows;
    for (auto& o : outcomes)
        if (o.row)
            rows.push_back(*o.row);
    CommandResult result = collect(items, std::move(outcomes));

    if (cfg.mask_dir) {
        MetricsReport report;
        report.rows = std::move(rows);
        for (const auto& f : result.failures)
            report.failures.push_back(f);
        for (const auto& rec : result.images)
            if (!gts.count(rec.id))
                report.failures.push_back({rec.id, "no ground-truth mask"});
        std::sort(report.failures.begin(), report.failures.end(),
                  [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
        report.aggregate();
        write_text(cfg.output_dir / "report.csv", report.to_csv());
        write_text(cfg.output_dir / "report.json", report.to_json());
        result.report = std::move(report);
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "lesionseg";
    manifest["version"] = LESIONSEG_VERSION;
    manifest["command"] = "pipeline";
    manifest["config"] = config_text(cfg);
    manifest["images"] = nlohmann::ordered_json::array();
    for (const auto& rec : result.images)
        manifest["images"].push_back({{"id", rec.id},
                                      {"width", rec.width},
                                      {"height", rec.height},
                                      {"seconds", rec.seconds},
                                      {"outputs", rec.outputs}});
    manifest["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : result.failures)
        manifest["failures"].push_back({{"image_id", f.image_id}, {"reason", f.reason}});

    std::vector<std::string> listing{"manifest.json"};
    for (const auto& entry : fs::directory_iterator(cfg.output_dir))
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            listing.push_back(entry.path().filename().string());
    std::sort(listing.begin(), listing.end());
    manifest["output_files"] = listing;
    write_text(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return result;
}

std::string config_text(const RunConfig& cfg)
{
    auto quote = [](const fs::path& p) { return "\"" + p.generic_string() + "\""; };
    auto list = [&](const std::vector<fs::path>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + quote(v[i]);
        return s + "]";
    };
    // shortest text that reads back to the same double
    auto num = [](double v) {
        char buf[32];
        return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    std::ostringstream out;
    out << "input-dir = " << list(cfg.input_dirs) << "\n";
    if (cfg.mask_dir)
        out << "mask-dir = " << quote(*cfg.mask_dir) << "\n";
    out << "weights = " << list(cfg.weights) << "\n";
    out << "output-dir = " << quote(cfg.output_dir) << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "ldr-alpha = " << num(cfg.ldr_alpha) << "\n";
    out << "texture-order = " << num(cfg.texture.v) << "\n";
    out << "texture-terms = " << cfg.texture.terms << "\n";
    out << "threshold = " << num(cfg.postprocess.prob_threshold) << "\n";
    out << "se-size = " << cfg.postprocess.se_size << "\n";
    out << "cutoff = " << num(cfg.metrics.jaccard_cutoff) << "\n";
    return out.str();
}

}  // namespace lesionseg
