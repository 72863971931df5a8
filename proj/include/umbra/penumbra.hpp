#ifndef UMBRA_PENUMBRA_HPP
#define UMBRA_PENUMBRA_HPP

#include <cstdint>
#include <vector>

#include "umbra/image.hpp"

namespace umbra {

enum class MorphOp { Dilate, Erode };

/// Binary morphology with an L1 (diamond) structuring element of radius r.
/// Outside-image pixels count as non-shadow, so dilation never wraps and
/// erosion shrinks at the borders.
ShadowMask morph(const ShadowMask& mask, int r, MorphOp op);

/// L1 (Manhattan) distance to the nearest source pixel, two-pass chamfer.
/// Pixels with no reachable source get kUnreachable.
std::vector<int32_t> manhattan_distance(const ShadowMask& sources);
constexpr int32_t kUnreachable = INT32_MAX / 4;

/// Penumbra band around the shadow boundary: Dilate(M,r) AND NOT Erode(M,r),
/// plus the two Manhattan distance fields the boundary blend needs.
struct PenumbraBand {
    ShadowMask band;
    int radius = 0;
    std::vector<int32_t> dist_inner;  // to the eroded umbra core
    std::vector<int32_t> dist_outer;  // to the lit exterior of the dilated mask
};

PenumbraBand extract_penumbra(const ShadowMask& mask, int r);

/// Blends relit and original values across the band with
/// t = dist_outer / (dist_inner + dist_outer), then diffuses residual seams
/// with one 3x3 mean pass restricted to band pixels. Pixels outside the band
/// pass through from the relit buffer (identical to the original outside the
/// shadow mask).
ImageBuffer smooth_boundary(const ImageBuffer& original, const ImageBuffer& relit,
                            const PenumbraBand& band);

}  // namespace umbra

#endif
