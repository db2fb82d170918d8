#include "lesionseg/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "json.hpp"

#include "lesionseg/dataset.hpp"
#include "lesionseg/png_io.hpp"
#include "lesionseg/postprocess.hpp"

namespace lesionseg {

namespace fs = std::filesystem;

namespace {

struct Overlap {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t both = 0;
};

Overlap overlap(const BinaryMask& x, const BinaryMask& y)
{
    if (x.width() != y.width() || x.height() != y.height())
        throw InvalidArgument("mask size mismatch: " + std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                              " vs " + std::to_string(y.width()) + "x" + std::to_string(y.height()));
    Overlap o;
    auto a = x.data();
    auto b = y.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        o.x += a[i];
        o.y += b[i];
        o.both += a[i] & b[i];
    }
    return o;
}

// Pairwise summation keeps the mean insensitive to input order.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi)
{
    if (hi - lo <= 2) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void MetricsConfig::validate() const
{
    if (!(jaccard_cutoff > 0.0 && jaccard_cutoff < 1.0))
        throw InvalidArgument("jaccard cutoff must lie in (0,1), got " + std::to_string(jaccard_cutoff));
}

double dice(const BinaryMask& x, const BinaryMask& y)
{
    const Overlap o = overlap(x, y);
    if (o.x + o.y == 0)
        return 1.0;
    return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.x + o.y);
}

double jaccard(const BinaryMask& x, const BinaryMask& y)
{
    const Overlap o = overlap(x, y);
    const std::size_t uni = o.x + o.y - o.both;
    if (uni == 0)
        return 1.0;
    return static_cast<double>(o.both) / static_cast<double>(uni);
}

double thresholded_jaccard(double j, double cutoff)
{
    return j < cutoff ? 0.0 : j;
}

ProbMap ensemble_average(const std::vector<ProbMap>& maps)
{
    if (maps.empty())
        throw InvalidArgument("ensemble_average needs at least one map");
    const int w = maps.front().width();
    const int h = maps.front().height();
    for (const auto& m : maps)
        if (m.width() != w || m.height() != h)
            throw InvalidArgument("ensemble members differ in size");

    ProbMap out(w, h);
    const auto n = static_cast<std::ptrdiff_t>(out.size());
    const double count = static_cast<double>(maps.size());
#pragma omp parallel
    {
        std::vector<double> column(maps.size());
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < maps.size(); ++k)
                column[k] = maps[k].data()[i];
            out.data()[i] = static_cast<float>(pairwise_sum(column, 0, column.size()) / count);
        }
    }
    return out;
}

void MetricsReport::aggregate()
{
    mean_dice = mean_jaccard = mean_thresholded_jaccard = 0.0;
    if (rows.empty())
        return;
    for (const auto& r : rows) {
        mean_dice += r.dice;
        mean_jaccard += r.jaccard;
        mean_thresholded_jaccard += r.thresholded_jaccard;
    }
    const double n = static_cast<double>(rows.size());
    mean_dice /= n;
    mean_jaccard /= n;
    mean_thresholded_jaccard /= n;
}

std::string MetricsReport::to_csv() const
{
    std::string out = "image_id,dice,jaccard,thresholded_jaccard,pred_area,gt_area\n";
    for (const auto& r : rows)
        out += r.image_id + "," + fmt(r.dice) + "," + fmt(r.jaccard) + "," + fmt(r.thresholded_jaccard) + "," +
               std::to_string(r.pred_area) + "," + std::to_string(r.gt_area) + "\n";
    return out;
}

std::string MetricsReport::to_json() const
{
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"image_id", r.image_id},
                             {"dice", r.dice},
                             {"jaccard", r.jaccard},
                             {"thresholded_jaccard", r.thresholded_jaccard},
                             {"pred_area", r.pred_area},
                             {"gt_area", r.gt_area}});
    j["aggregate"] = {{"count", rows.size()},
                      {"dice", mean_dice},
                      {"jaccard", mean_jaccard},
                      {"thresholded_jaccard", mean_thresholded_jaccard}};
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : failures)
        j["failures"].push_back({{"image_id", f.image_id}, {"reason", f.reason}});
    return j.dump(2) + "\n";
}

MetricsRow score_pair(const std::string& image_id, const BinaryMask& pred, const BinaryMask& gt,
                      const MetricsConfig& cfg)
{
    MetricsRow row;
    row.image_id = image_id;
    row.dice = dice(pred, gt);
    row.jaccard = jaccard(pred, gt);
    row.thresholded_jaccard = thresholded_jaccard(row.jaccard, cfg.jaccard_cutoff);
    row.pred_area = pred.count();
    row.gt_area = gt.count();
    return row;
}

MetricsReport evaluate(const fs::path& pred_dir, const fs::path& gt_dir, const MetricsConfig& cfg)
{
    cfg.validate();
    const auto preds = index_directory(pred_dir, ".png");
    const auto gts = index_directory(gt_dir, ".png");

    MetricsReport report;
    for (const auto& [id, path] : preds) {
        const auto gt = gts.find(id);
        if (gt == gts.end()) {
            report.failures.push_back({id, "no ground-truth mask"});
            continue;
        }
        try {
            report.rows.push_back(score_pair(id, image_to_mask(read_mask(path)), image_to_mask(read_mask(gt->second)), cfg));
        } catch (const std::exception& e) {
            report.failures.push_back({id, e.what()});
        }
    }
    for (const auto& [id, path] : gts)
        if (!preds.count(id))
            report.failures.push_back({id, "no predicted mask"});
    std::sort(report.failures.begin(), report.failures.end(),
              [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
    report.aggregate();
    return report;
}

}  // namespace lesionseg
