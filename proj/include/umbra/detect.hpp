#ifndef UMBRA_DETECT_HPP
#define UMBRA_DETECT_HPP

#include "umbra/image.hpp"

namespace umbra {

/// HSV threshold fallback detector. Deliberately classical: it exists so the
/// pipeline runs end-to-end on bare images; benchmark evaluations should use
/// externally supplied masks.
struct DetectConfig {
    double value_percentile = 0.3;  // quantile of V below which a pixel is shadow-dark
    double sat_min = 0.15;          // saturation floor for the chromatic branch
    int min_component = 25;         // connected components below this are dropped

    void validate() const;
};

/// Raw threshold stage, before component filtering and closing: shadow iff
/// V < q AND (S >= sat_min OR V < q/2), where q is the nearest-rank
/// value_percentile quantile of V over the whole image. Exposed so the
/// quantile monotonicity is testable in isolation.
ShadowMask threshold_candidates(const ImageBuffer& img, const DetectConfig& cfg);

/// threshold_candidates, then removal of small 4-connected components, then
/// one 3x3 (square) morphological closing.
ShadowMask detect_shadows(const ImageBuffer& img, const DetectConfig& cfg);

}  // namespace umbra

#endif
