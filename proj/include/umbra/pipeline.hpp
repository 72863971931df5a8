#ifndef UMBRA_PIPELINE_HPP
#define UMBRA_PIPELINE_HPP

#include <iosfwd>
#include <string>

#include "umbra/detect.hpp"
#include "umbra/relight.hpp"

namespace umbra {

/// Everything the CLI can configure, with defaults matching the published
/// parameter study (n = 7 neighbors, 600 px superpixels, weights
/// 0.6/0.3/0.1, epsilon 1e-4, fallback threshold 0.2).
struct PipelineConfig {
    RelightConfig relight;
    DetectConfig detect;
    int penumbra_radius = 3;
    bool smoothing = true;
    int threads = 1;

    void validate() const;
};

/// Flat key=value config text ('#' starts a comment). Unknown keys and
/// unparsable values raise ConfigError. Keys: n_neighbors, superpixel_size,
/// alpha, beta, gamma, epsilon, fallback_threshold, fallback_top_k,
/// normalize_weights, penumbra_radius, smoothing, threads, value_percentile,
/// sat_min, min_component.
void apply_config_text(const std::string& text, PipelineConfig& cfg);
void apply_config_entry(const std::string& key, const std::string& value, PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

/// remove_shadows followed by penumbra extraction and boundary smoothing
/// (when enabled). This is the complete removal pipeline behind `remove`.
RemovalResult run_pipeline(const ImageBuffer& img, const ShadowMask& mask,
                           const PipelineConfig& cfg);

}  // namespace umbra

#endif
