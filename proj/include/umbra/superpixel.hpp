#ifndef UMBRA_SUPERPIXEL_HPP
#define UMBRA_SUPERPIXEL_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "umbra/image.hpp"

namespace umbra {

enum class RegionClass : uint8_t { Nonshadow = 0, Shadow = 1 };

struct Superpixel {
    int32_t id = -1;
    RegionClass cls = RegionClass::Nonshadow;
    std::vector<uint32_t> pixels;  // linear indices, row-major
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    std::array<double, 3> mean_rgb{};  // original-image channel means
    std::array<double, 3> mean_lab{};
    double mean_a = 0.0;
    std::array<std::vector<double>, 3> lab_hist;  // normalized, per Lab channel
    std::vector<double> lbp_hist;                 // normalized over LBP codes
};

struct SuperpixelMap {
    int width = 0;
    int height = 0;
    std::vector<int32_t> labels;  // dense ids 0..K-1, one per pixel
    std::vector<Superpixel> regions;

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

struct SlicParams {
    double compactness = 10.0;
    int iterations = 10;
};

/// SLIC restricted to each mask class separately: shadow and non-shadow
/// regions are segmented independently (ceil(region_pixels / target_size)
/// grid seeds each) and merged with disjoint id ranges, so no superpixel ever
/// crosses the mask. Fragments smaller than target_size/4 that end up
/// disconnected from their cluster are merged into the adjacent same-class
/// superpixel with the closest mean Lab color.
SuperpixelMap slic_masked(const ImageBuffer& img_rgb, const ShadowMask& mask, int target_size,
                          const SlicParams& params = {});

/// Rebuilds region records (pixel lists, centroids) from a raw label raster.
/// Intended for externally supplied segmentations.
SuperpixelMap make_map_from_labels(std::vector<int32_t> labels, int width, int height);

/// class = shadow iff the superpixel's shadow-pixel proportion exceeds 0.8.
void classify_superpixels(SuperpixelMap& map, const ShadowMask& mask);

struct StatsConfig {
    int lab_bins = 32;
    int lbp_bins = 256;
};

// Histogram bin ranges in native Lab units.
constexpr double kLabRangeLo[3] = {0.0, -128.0, -128.0};
constexpr double kLabRangeHi[3] = {100.0, 128.0, 128.0};

/// Fills per-region means and normalized histograms. img_rgb supplies the
/// channel means used for illumination ratios; img_lab and img_lbp supply the
/// similarity features (callers may pass feature planes derived from a
/// different working buffer than img_rgb).
void compute_region_stats(const ImageBuffer& img_rgb, const ImageBuffer& img_lab,
                          const ImageBuffer& img_lbp, SuperpixelMap& map,
                          const StatsConfig& cfg = {});

double lab_bin_center(int channel, int bin, int bins);

/// Debug: label map rendered with per-id pseudo-random colors.
ImageBuffer colorize_labels(const SuperpixelMap& map, uint32_t seed = 1);

/// Debug: one line per region (id, class, size, centroid, means).
void dump_regions(const SuperpixelMap& map, std::ostream& os);

}  // namespace umbra

#endif
