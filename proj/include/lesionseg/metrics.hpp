#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lesionseg/morphology.hpp"
#include "lesionseg/unet.hpp"

namespace lesionseg {

struct MetricsConfig {
    double jaccard_cutoff = 0.65;

    void validate() const;
};

// Both metrics score two empty masks as 1 and reject size mismatches.
double dice(const BinaryMask& x, const BinaryMask& y);
double jaccard(const BinaryMask& x, const BinaryMask& y);

/// 0 when j < cutoff, j otherwise (j == cutoff keeps its score).
double thresholded_jaccard(double j, double cutoff = 0.65);

/// Per-pixel mean of equally sized probability maps.
ProbMap ensemble_average(const std::vector<ProbMap>& maps);

struct MetricsRow {
    std::string image_id;
    double dice = 0.0;
    double jaccard = 0.0;
    double thresholded_jaccard = 0.0;
    std::size_t pred_area = 0;
    std::size_t gt_area = 0;
};

struct MetricsFailure {
    std::string image_id;
    std::string reason;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;          ///< sorted by image_id
    std::vector<MetricsFailure> failures;  ///< unmatched ids and unreadable/mismatched pairs
    double mean_dice = 0.0;
    double mean_jaccard = 0.0;
    double mean_thresholded_jaccard = 0.0;

    /// Recomputes the aggregate means from `rows`.
    void aggregate();

    std::string to_csv() const;
    std::string to_json() const;
};

MetricsRow score_pair(const std::string& image_id, const BinaryMask& pred, const BinaryMask& gt,
                      const MetricsConfig& cfg);

/// Pairs "<stem>.png" files of the two directories by image id and scores
/// each pair. A trailing "_segmentation" on a stem is ignored when pairing.
MetricsReport evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                       const MetricsConfig& cfg = {});

}  // namespace lesionseg
