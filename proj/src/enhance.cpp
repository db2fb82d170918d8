#include "lesionseg/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lesionseg {

namespace {

constexpr int kLevels = 256;

int level_of(float v)
{
    return static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

IntensityTransform IntensityTransform::identity()
{
    IntensityTransform f;
    for (int i = 0; i < kLevels; ++i)
        f.lut[i] = i;
    return f;
}

double IntensityTransform::operator()(double level) const
{
    level = std::clamp(level, 0.0, 255.0);
    const int lo = static_cast<int>(std::floor(level));
    if (lo >= 255)
        return lut[255];
    const double t = level - lo;
    return lut[lo] + t * (lut[lo + 1] - lut[lo]);
}

void TextureConfig::validate() const
{
    if (!(v > 0.0 && v < 1.0))
        throw InvalidArgument("fractional order must lie in (0,1), got " + std::to_string(v));
    if (terms < 2)
        throw InvalidArgument("fractional kernel needs at least 2 terms, got " + std::to_string(terms));
}

Hist2D build_hist2d(const PlaneF32& intensity)
{
    Hist2D h;
    const int w = intensity.width();
    const int hgt = intensity.height();
    std::vector<int> levels(intensity.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        levels[i] = level_of(intensity.data()[i]);

    auto add = [&h](int a, int b) {
        if (a != b) {
            h.at(a, b) += 1.0;
            h.at(b, a) += 1.0;
        }
    };
    for (int y = 0; y < hgt; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = levels[static_cast<std::size_t>(y) * w + x];
            if (x + 1 < w)
                add(a, levels[static_cast<std::size_t>(y) * w + x + 1]);
            if (y + 1 < hgt)
                add(a, levels[static_cast<std::size_t>(y + 1) * w + x]);
        }
    }
    return h;
}

// Each layer l collects the pairs of levels (k, k+l). Within a layer the
// log-mass of a pair is spread over the l unit differences it spans and
// averaged by how many pairs cover each difference; layers are then mixed
// with weights (mass / max mass)^alpha and the cumulated differences give
// the output levels.
IntensityTransform ldr_transform(const Hist2D& hist, double alpha)
{
    if (alpha < 0.0)
        throw InvalidArgument("ldr alpha must be non-negative");

    constexpr int kDiffs = kLevels - 1;
    std::array<double, kDiffs> combined{};
    std::vector<std::array<double, kDiffs>> per_layer(kLevels);
    std::array<double, kLevels> layer_mass{};

    std::vector<double> hl;
    for (int l = 1; l < kLevels; ++l) {
        const int pairs = kLevels - l;
        hl.assign(pairs, 0.0);
        double mass = 0.0;
        for (int k = 0; k < pairs; ++k) {
            hl[k] = std::log(hist.at(k, k + l) + 1.0);
            mass += hl[k];
        }
        layer_mass[l] = mass;
        if (mass == 0.0)
            continue;

        // Sliding-window sum: m[i] = sum of hl[k] over k in [i-l+1, i] ∩ [0, pairs-1].
        std::array<double, kDiffs> m{};
        double window = 0.0;
        for (int i = 0; i < kDiffs; ++i) {
            if (i < pairs)
                window += hl[i];
            if (i - l >= 0)
                window -= hl[i - l];
            m[i] = window;
        }
        const double floor_m = *std::min_element(m.begin(), m.end());
        auto& d = per_layer[l];
        double total = 0.0;
        for (int i = 0; i < kDiffs; ++i) {
            const int cover = std::min(i, pairs - 1) - std::max(0, i - l + 1) + 1;
            d[i] = (m[i] - floor_m) / cover;
            total += d[i];
        }
        if (total == 0.0) {
            layer_mass[l] = 0.0;
            continue;
        }
        for (double& v : d)
            v /= total;
    }

    const double max_mass = *std::max_element(layer_mass.begin(), layer_mass.end());
    if (max_mass == 0.0)
        return IntensityTransform::identity();

    for (int l = 1; l < kLevels; ++l) {
        if (layer_mass[l] == 0.0)
            continue;
        const double weight = std::pow(layer_mass[l] / max_mass, alpha);
        for (int i = 0; i < kDiffs; ++i)
            combined[i] += weight * per_layer[l][i];
    }
    double total = 0.0;
    for (double v : combined)
        total += v;
    if (!(total > 0.0))
        return IntensityTransform::identity();

    IntensityTransform f;
    double acc = 0.0;
    f.lut[0] = 0.0;
    for (int i = 0; i < kDiffs; ++i) {
        acc += combined[i];
        f.lut[i + 1] = std::min(255.0, 255.0 * acc / total);
    }
    f.lut[255] = 255.0;
    return f;
}

PlaneF32 apply_transform(const IntensityTransform& f, const PlaneF32& plane)
{
    PlaneF32 out(plane.width(), plane.height());
    auto src = plane.data();
    auto dst = out.data();
    const auto n = static_cast<std::ptrdiff_t>(src.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        dst[i] = static_cast<float>(f(src[i]));
    return out;
}

PlaneF32 ldr_contrast(const ImageU8& img, double alpha)
{
    const PlaneF32 gray = intensity(img);
    return apply_transform(ldr_transform(build_hist2d(gray), alpha), gray);
}

std::array<PlaneF32, 3> hue_preserving_color_planes(const ImageU8& img, const IntensityTransform& f)
{
    if (img.channels() != 3)
        throw InvalidArgument("hue-preserving enhancement requires a 3-channel image");
    std::array<PlaneF32, 3> out;
    for (auto& p : out)
        p = PlaneF32(img.width(), img.height());

    auto src = img.data();
    const auto n = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double rgb[3] = {double(src[3 * i]), double(src[3 * i + 1]), double(src[3 * i + 2])};
        const double l = (rgb[0] + rgb[1] + rgb[2]) / 3.0;
        const double target = f(l);
        for (int c = 0; c < 3; ++c) {
            double v = rgb[c];
            if (target <= l) {
                if (l > 0.0)
                    v = (target / l) * rgb[c];
            } else if (l < 255.0) {
                v = 255.0 - ((255.0 - target) / (255.0 - l)) * (255.0 - rgb[c]);
            }
            out[c].data()[i] = static_cast<float>(v);
        }
    }
    return out;
}

ImageU8 hue_preserving_color(const ImageU8& img, const IntensityTransform& f)
{
    const auto planes = hue_preserving_color_planes(img, f);
    ImageU8 out(img.width(), img.height(), 3);
    auto dst = out.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        for (int c = 0; c < 3; ++c)
            dst[3 * i + c] = quantize_u8(planes[c].data()[i]);
    return out;
}

std::vector<double> gl_coefficients(double v, int terms)
{
    std::vector<double> c(static_cast<std::size_t>(terms));
    c[0] = 1.0;
    for (int k = 1; k < terms; ++k)
        c[k] = c[k - 1] * (k - 1 - v) / k;
    return c;
}

std::vector<DirectionalKernel> fractional_kernels(const TextureConfig& cfg)
{
    cfg.validate();
    const auto c = gl_coefficients(cfg.v, cfg.terms);
    return {
        {"E", 1, 0, c},   {"W", -1, 0, c},  {"N", 0, -1, c}, {"S", 0, 1, c},
        {"NE", 1, -1, c}, {"NW", -1, -1, c}, {"SE", 1, 1, c}, {"SW", -1, 1, c},
    };
}

PlaneF32 fractional_magnitude(const PlaneF32& intensity, const TextureConfig& cfg)
{
    const auto kernels = fractional_kernels(cfg);
    const int w = intensity.width();
    const int h = intensity.height();
    PlaneF32 out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double energy = 0.0;
            for (const auto& k : kernels) {
                double response = 0.0;
                for (int t = 0; t < cfg.terms; ++t) {
                    const int sx = std::clamp(x + t * k.dx, 0, w - 1);
                    const int sy = std::clamp(y + t * k.dy, 0, h - 1);
                    response += k.coeffs[t] * intensity.at(sx, sy);
                }
                energy += response * response;
            }
            out.at(x, y) = static_cast<float>(std::sqrt(energy));
        }
    }
    return out;
}

PlaneF32 fractional_texture(const ImageU8& img, const TextureConfig& cfg)
{
    PlaneF32 mag = fractional_magnitude(intensity(img), cfg);
    auto data = mag.data();
    const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) {
        std::fill(data.begin(), data.end(), 0.0f);
        return mag;
    }
    const double scale = 255.0 / (hi - lo);
    for (float& v : data)
        v = static_cast<float>((v - lo) * scale);
    return mag;
}

ChannelStack build_stack(const ImageU8& img, const EnhanceConfig& cfg)
{
    if (img.channels() != 3)
        throw InvalidArgument("build_stack requires a 3-channel image");
    const ImageU8 small = resize_bilinear(img, kStackSize, kStackSize);
    const PlaneF32 gray = intensity(small);
    const IntensityTransform f = ldr_transform(build_hist2d(gray), cfg.ldr_alpha);

    auto color = hue_preserving_color_planes(small, f);
    ChannelStack stack;
    stack.planes[0] = std::move(color[0]);
    stack.planes[1] = std::move(color[1]);
    stack.planes[2] = std::move(color[2]);
    stack.planes[3] = apply_transform(f, gray);
    stack.planes[4] = fractional_texture(small, cfg.texture);
    for (auto& plane : stack.planes)
        for (float& v : plane.data())
            v /= 255.0f;
    return stack;
}

}  // namespace lesionseg
