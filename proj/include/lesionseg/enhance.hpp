#pragma once

#include <array>
#include <vector>

#include "lesionseg/image.hpp"

namespace lesionseg {

/// Symmetric 256x256 co-occurrence histogram of unequal gray levels over
/// 4-connected neighbor pairs. The diagonal is always zero.
struct Hist2D {
    std::vector<double> counts = std::vector<double>(256 * 256, 0.0);

    double at(int j, int k) const { return counts[static_cast<std::size_t>(j) * 256 + k]; }
    double& at(int j, int k) { return counts[static_cast<std::size_t>(j) * 256 + k]; }
};

/// Monotone gray-level mapping with lut[0] = 0 and lut[255] = 255.
struct IntensityTransform {
    std::array<double, 256> lut{};

    static IntensityTransform identity();

    /// Evaluates the mapping at a real level in [0,255], linearly
    /// interpolating between integer levels.
    double operator()(double level) const;
};

struct TextureConfig {
    double v = 0.5;  ///< fractional order, 0 < v < 1
    int terms = 4;   ///< series coefficients per directional kernel, >= 2

    void validate() const;
};

/// One compass direction of the fractional differential operator.
/// Coefficient k weights the sample k steps from the target pixel along
/// (dx, dy).
struct DirectionalKernel {
    const char* name;
    int dx;
    int dy;
    std::vector<double> coeffs;
};

struct EnhanceConfig {
    double ldr_alpha = 2.5;
    TextureConfig texture;
};

inline constexpr int kStackSize = 128;
inline constexpr int kStackPlanes = 5;
inline constexpr std::array<const char*, kStackPlanes> kStackOrder = {
    "color_r", "color_g", "color_b", "contrast_intensity", "texture_intensity"};

/// Network input: five 128x128 planes in [0,1], ordered as kStackOrder.
struct ChannelStack {
    std::array<PlaneF32, kStackPlanes> planes;
};

Hist2D build_hist2d(const PlaneF32& intensity);

/// Layered-difference-representation transform of a 2D histogram.
/// `alpha` is the exponent that weights layers by their relative mass.
IntensityTransform ldr_transform(const Hist2D& hist, double alpha = 2.5);

PlaneF32 apply_transform(const IntensityTransform& f, const PlaneF32& plane);

/// Contrast-enhanced intensity plane, values in [0,255].
PlaneF32 ldr_contrast(const ImageU8& img, double alpha = 2.5);

/// Hue-preserving enhancement of an RGB image driven by the scalar
/// mapping `f` of its intensity. Pixels whose target intensity drops are
/// scaled toward black; pixels whose target rises are scaled toward white
/// in the complement space. Both branches stay inside the RGB cube.
/// Returns unquantized R, G, B planes in [0,255].
std::array<PlaneF32, 3> hue_preserving_color_planes(const ImageU8& img, const IntensityTransform& f);
ImageU8 hue_preserving_color(const ImageU8& img, const IntensityTransform& f);

/// Truncated Grünwald-Letnikov coefficients c_0 = 1, c_k = c_{k-1} (k-1-v) / k.
std::vector<double> gl_coefficients(double v, int terms);

/// Eight directional kernels in the order E, W, N, S, NE, NW, SE, SW.
std::vector<DirectionalKernel> fractional_kernels(const TextureConfig& cfg);

/// Euclidean norm over the eight directional responses, replicate-edge
/// padding, before any normalization.
PlaneF32 fractional_magnitude(const PlaneF32& intensity, const TextureConfig& cfg);

/// Texture-enhanced intensity: fractional_magnitude min-max normalized to
/// [0,255]; a flat magnitude yields an all-zero plane.
PlaneF32 fractional_texture(const ImageU8& img, const TextureConfig& cfg = {});

ChannelStack build_stack(const ImageU8& img, const EnhanceConfig& cfg = {});

}  // namespace lesionseg
