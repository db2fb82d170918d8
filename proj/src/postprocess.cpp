#include "lesionseg/postprocess.hpp"

#include <array>
#include <string>
#include <tuple>
#include <vector>

namespace lesionseg {

void PostprocessConfig::validate() const
{
    if (!(prob_threshold > 0.0 && prob_threshold < 1.0))
        throw InvalidArgument("probability threshold must lie in (0,1), got " + std::to_string(prob_threshold));
    if (se_size < 1 || se_size % 2 == 0)
        throw InvalidArgument("structuring element size must be odd and >= 1, got " + std::to_string(se_size));
}

BinaryMask threshold(const ProbMap& p, double t)
{
    if (!(t > 0.0 && t < 1.0))
        throw InvalidArgument("threshold must lie in (0,1)");
    BinaryMask out(p.width(), p.height());
    auto src = p.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] >= t ? 1 : 0;
    return out;
}

namespace {

struct Component {
    std::size_t area = 0;
    int top = 0;
    int left = 0;
    std::size_t first = 0;
};

}  // namespace

BinaryMask largest_region(const BinaryMask& m)
{
    const int w = m.width();
    const int h = m.height();
    BinaryMask out(w, h);

    // 8-connected labelling by explicit-stack flood fill.
    std::vector<int> label(m.size(), -1);
    std::vector<Component> comps;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < m.size(); ++start) {
        if (!m.data()[start] || label[start] >= 0)
            continue;
        const int id = static_cast<int>(comps.size());
        Component c;
        c.first = start;
        c.top = static_cast<int>(start / w);
        c.left = static_cast<int>(start % w);
        label[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            ++c.area;
            const int x = static_cast<int>(i % w);
            const int y = static_cast<int>(i / w);
            c.left = std::min(c.left, x);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                        continue;
                    const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                    if (m.data()[j] && label[j] < 0) {
                        label[j] = id;
                        stack.push_back(j);
                    }
                }
            }
        }
        comps.push_back(c);
    }
    if (comps.empty())
        return out;

    std::size_t best = 0;
    for (std::size_t i = 1; i < comps.size(); ++i) {
        const auto& a = comps[i];
        const auto& b = comps[best];
        if (std::tuple(-static_cast<long long>(a.area), a.top, a.left, a.first) <
            std::tuple(-static_cast<long long>(b.area), b.top, b.left, b.first))
            best = i;
    }

    // Background reachable from the border through 4-connected steps is
    // outside the component's outer contour; everything else is filled.
    std::vector<unsigned char> outside(m.size(), 0);
    auto is_fg = [&](std::size_t i) { return label[i] == static_cast<int>(best); };
    auto seed = [&](int x, int y) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!is_fg(i) && !outside[i]) {
            outside[i] = 1;
            stack.push_back(i);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    constexpr std::array<std::array<int, 2>, 4> kSteps = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w);
        const int y = static_cast<int>(i / w);
        for (const auto& [dx, dy] : kSteps) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx >= 0 && ny >= 0 && nx < w && ny < h)
                seed(nx, ny);
        }
    }
    auto dst = out.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        dst[i] = outside[i] ? 0 : 1;
    return out;
}

BinaryMask resize_nearest(const BinaryMask& m, int target_w, int target_h)
{
    BinaryMask out(target_w, target_h);
    const double sx = static_cast<double>(m.width()) / target_w;
    const double sy = static_cast<double>(m.height()) / target_h;
    std::vector<int> xs(static_cast<std::size_t>(target_w));
    for (int x = 0; x < target_w; ++x)
        xs[x] = std::min(static_cast<int>((x + 0.5) * sx), m.width() - 1);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < target_h; ++y) {
        const int src_y = std::min(static_cast<int>((y + 0.5) * sy), m.height() - 1);
        for (int x = 0; x < target_w; ++x)
            out.set(x, y, m.at(xs[x], src_y));
    }
    return out;
}

BinaryMask postprocess(const ProbMap& p, const PostprocessConfig& cfg, int orig_w, int orig_h)
{
    cfg.validate();
    if (orig_w < 1 || orig_h < 1)
        throw InvalidArgument("target dimensions must be positive");
    BinaryMask m = threshold(p, cfg.prob_threshold);
    m = close(open(m, cfg.se_size), cfg.se_size);
    m = resize_nearest(largest_region(m), orig_w, orig_h);
    // Nearest-neighbour decimation can cut thin bridges or open holes.
    if (orig_w < p.width() || orig_h < p.height())
        m = largest_region(m);
    return m;
}

ImageU8 mask_to_image(const BinaryMask& m)
{
    ImageU8 img(m.width(), m.height(), 1);
    auto src = m.data();
    auto dst = img.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] ? 255 : 0;
    return img;
}

BinaryMask image_to_mask(const ImageU8& img)
{
    if (img.channels() != 1)
        throw InvalidArgument("mask image must be single-channel");
    BinaryMask m(img.width(), img.height());
    auto src = img.data();
    auto dst = m.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] != 0 ? 1 : 0;
    return m;
}

}  // namespace lesionseg
