#ifndef UMBRA_RELIGHT_HPP
#define UMBRA_RELIGHT_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "umbra/features.hpp"
#include "umbra/image.hpp"
#include "umbra/superpixel.hpp"

namespace umbra {

struct RelightConfig {
    int n_neighbors = 7;
    double alpha = 0.6;
    double beta = 0.3;
    double gamma = 0.1;
    double epsilon = 1e-4;
    double fallback_threshold = 0.2;
    int fallback_top_k = 7;
    bool normalize_weights = true;
    int superpixel_size = 600;

    WeightParams weight_params() const { return {alpha, beta, gamma, epsilon}; }
    void validate() const;
};

/// Per shadow-superpixel outcome of the reference search and relighting.
struct RelightRecord {
    int32_t sp_id = -1;
    std::vector<int32_t> ref_ids;
    std::vector<double> weights;  // raw contribution weights, pre-normalization
    std::array<double, 3> ratio{};
    bool fallback_used = false;
};

struct RelightReport {
    std::vector<RelightRecord> records;  // one per shadow superpixel, by id
    size_t fallback_count = 0;
    double duration_ms = 0.0;
    std::string diagnostic;  // nonempty when relighting was impossible
};

void write_report(const RelightReport& report, std::ostream& os);

/// The n non-shadow superpixels with the smallest centroid Euclidean
/// distance to sp (all of them when fewer exist); ties prefer lower ids.
std::vector<int32_t> nearest_nonshadow(const SuperpixelMap& map, const Superpixel& sp, int n);

/// Per-channel illumination ratio (mean_ns - mean_s) / mean_s on the
/// region RGB means; denominators below 1/255 are clamped to 1/255.
std::array<double, 3> superpixel_ratio(const Superpixel& sp_s, const Superpixel& sp_ns);

/// Weighted combination of per-reference ratios. With normalize_weights the
/// weights are scaled to sum 1 first (convex combination); otherwise the
/// literal weighted sum is used.
std::array<double, 3> aggregate_ratio(const std::vector<std::array<double, 3>>& ratios,
                                      const std::vector<double>& weights,
                                      const RelightConfig& cfg);

/// out = clamp((r_c + 1) * in, 0, 1) over the superpixel's pixels only.
void relight_superpixel(ImageBuffer& img, const Superpixel& sp, const std::array<double, 3>& ratio);

struct ReferenceSelection {
    std::vector<int32_t> ref_ids;
    std::vector<double> weights;
    bool fallback_used = false;
};

/// Scores the n nearest non-shadow superpixels; when every weight falls
/// below the fallback threshold (material mismatch) the search widens to all
/// non-shadow superpixels and the top fallback_top_k by weight are returned.
ReferenceSelection select_references(const SuperpixelMap& map, const Superpixel& sp_s,
                                     const RelightConfig& cfg);

struct RemovalResult {
    ImageBuffer image;
    RelightReport report;
    SuperpixelMap map;
};

/// Full umbra relighting pass: mask-constrained segmentation, a preliminary
/// global relight of shadow pixels used only for feature extraction, then
/// per-superpixel reference selection and re-illumination of the original
/// shadow values. Non-shadow pixels are untouched. `order`, when given,
/// permutes the processing sequence of shadow superpixels (output is
/// independent of it); `threads` parallelizes over shadow superpixels.
RemovalResult remove_shadows(const ImageBuffer& img, const ShadowMask& mask,
                             const RelightConfig& cfg, int threads = 1,
                             const std::vector<int32_t>* order = nullptr);

}  // namespace umbra

#endif
