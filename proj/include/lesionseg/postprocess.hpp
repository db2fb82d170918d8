#pragma once

#include "lesionseg/image.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/unet.hpp"

namespace lesionseg {

struct PostprocessConfig {
    double prob_threshold = 0.5;
    int se_size = 5;

    void validate() const;
};

/// mask = prob >= t
BinaryMask threshold(const ProbMap& p, double t);

/// Largest 8-connected foreground component with its holes filled.
/// Equal areas are resolved by the smaller (top, left) bounding-box corner,
/// then by raster order of the component's first pixel.
BinaryMask largest_region(const BinaryMask& m);

/// Nearest-neighbour resize with the half-pixel-centre mapping.
BinaryMask resize_nearest(const BinaryMask& m, int target_w, int target_h);

/// threshold -> open -> close -> largest_region -> resize to (orig_w, orig_h).
BinaryMask postprocess(const ProbMap& p, const PostprocessConfig& cfg, int orig_w, int orig_h);

ImageU8 mask_to_image(const BinaryMask& m);
BinaryMask image_to_mask(const ImageU8& img);

}  // namespace lesionseg
