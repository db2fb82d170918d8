// lesionseg command-line driver.
//
// Exit codes: 0 success, 1 some images failed (the rest were processed),
// 2 configuration error (nothing was processed).

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "lesionseg/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitImageFailures = 1;
constexpr int kExitConfig = 2;

int report(const std::string& name, const lesionseg::CommandResult& result)
{
    for (const auto& f : result.failures)
        std::cerr << "lesionseg " << name << ": " << f.image_id << ": " << f.reason << "\n";
    std::cerr << "lesionseg " << name << ": " << result.images.size() << " processed, " << result.failures.size()
              << " failed\n";
    if (result.report && !result.report->rows.empty())
        std::cerr << "  mean dice " << result.report->mean_dice << ", mean jaccard " << result.report->mean_jaccard
                  << ", mean thresholded jaccard " << result.report->mean_thresholded_jaccard << "\n";
    return result.ok() ? kExitOk : kExitImageFailures;
}

}  // namespace

int main(int argc, char** argv)
{
    lesionseg::RunConfig cfg;
    std::string mask_dir;

    CLI::App app{"Dermoscopic lesion segmentation: enhancement, U-Net inference, post-processing and scoring"};
    app.set_config("--config", "", "Read options from a key = value file; flags given on the command line win");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--input-dir", cfg.input_dirs, "Input directory (repeat for ensemble)");
    app.add_option("--mask-dir", mask_dir, "Ground-truth mask directory");
    app.add_option("--weights", cfg.weights, "UNETW1 weight file (repeat for an ensemble)");
    app.add_option("--output-dir", cfg.output_dir, "Output directory");
    app.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    app.add_option("--ldr-alpha", cfg.ldr_alpha, "LDR layer-weight exponent")->capture_default_str();
    app.add_option("--texture-order", cfg.texture.v, "Fractional differential order v")->capture_default_str();
    app.add_option("--texture-terms", cfg.texture.terms, "Fractional kernel length")->capture_default_str();
    app.add_option("--threshold", cfg.postprocess.prob_threshold, "Probability threshold")->capture_default_str();
    app.add_option("--se-size", cfg.postprocess.se_size, "Square structuring element side")->capture_default_str();
    app.add_option("--cutoff", cfg.metrics.jaccard_cutoff, "Thresholded-Jaccard cutoff")->capture_default_str();

    struct Command {
        const char* name;
        const char* help;
        lesionseg::CommandResult (*run)(const lesionseg::RunConfig&);
    };
    const Command commands[] = {
        {"preprocess", "PNG images -> 5-plane channel stacks (<id>.stack.f32 + .json)", lesionseg::cmd_preprocess},
        {"infer", "Channel stacks -> probability maps averaged over all --weights", lesionseg::cmd_infer},
        {"postprocess", "Probability maps -> binary PNG masks at the original size", lesionseg::cmd_postprocess},
        {"ensemble", "Average probability maps from several --input-dir", lesionseg::cmd_ensemble},
        {"evaluate", "Score predicted masks against --mask-dir (report.csv, report.json)", lesionseg::cmd_evaluate},
        {"pipeline", "PNG images -> masks (+ report with --mask-dir) and manifest.json", lesionseg::cmd_pipeline},
    };
    for (const auto& c : commands)
        app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    if (!mask_dir.empty())
        cfg.mask_dir = mask_dir;

    for (const auto& c : commands) {
        if (!app.got_subcommand(c.name))
            continue;
        try {
            return report(c.name, c.run(cfg));
        } catch (const lesionseg::ConfigError& e) {
            std::cerr << "lesionseg " << c.name << ": configuration error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const std::exception& e) {
            std::cerr << "lesionseg " << c.name << ": " << e.what() << "\n";
            return kExitImageFailures;
        }
    }
    return kExitConfig;
}
