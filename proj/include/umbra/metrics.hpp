#ifndef UMBRA_METRICS_HPP
#define UMBRA_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "umbra/image.hpp"

namespace umbra {

/// Pixel confusion counts with shadow as the positive class.
struct ConfusionCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t tn = 0;
    uint64_t fn = 0;

    uint64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(const ShadowMask& pred, const ShadowMask& gt);

/// Detection scores, all expressed as percentages in [0,100].
struct DetectionMetrics {
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double ber = 0.0;
    double iou = 0.0;
};

/// Ratios with an empty denominator resolve to the perfect score when the
/// class is absent from both masks, and to the worst score otherwise.
DetectionMetrics detection_metrics(const ConfusionCounts& c);

/// One annotated shadow/reference region pair; pixel sets hold linear
/// row-major indices into the image raster.
struct RegionPair {
    int pair_id = 0;
    std::vector<uint32_t> shadow_pixels;
    std::vector<uint32_t> reference_pixels;
};

/// Hand-annotated same-material region pairs used by the removal metrics.
/// PNG encoding: R = pair id (1..255, 0 = unlabeled), G = role (0 shadow,
/// 255 reference), B = 0.
struct RegionPairAnnotation {
    int width = 0;
    int height = 0;
    std::vector<RegionPair> pairs;

    // Both sides of every pair must carry at least this many pixels.
    static constexpr size_t kMinPixelsPerSide = 50;

    void validate() const;  // throws IoError on a violated floor
};

RegionPairAnnotation load_annotation(const std::string& path);
void save_annotation(const RegionPairAnnotation& ann, const std::string& path);

/// Shadow Recovery Index: mean over pairs of the shadow/reference luminance
/// ratio, each ratio clipped to [0,2]. 1.0 = perfectly recovered uniform
/// scene, below 1 = still dark.
double sri(const ImageBuffer& result, const RegionPairAnnotation& ann);

/// Color Dissimilarity: mean over pairs of the mean absolute per-channel
/// gap between shadow and reference region means, on the 0-255 scale.
double cd(const ImageBuffer& result, const RegionPairAnnotation& ann);

}  // namespace umbra

#endif
