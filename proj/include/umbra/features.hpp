#ifndef UMBRA_FEATURES_HPP
#define UMBRA_FEATURES_HPP

#include <span>

#include "umbra/image.hpp"
#include "umbra/superpixel.hpp"

namespace umbra {

/// Classic 8-neighbor radius-1 LBP. Bit k is set iff neighbor k >= center,
/// neighbors ordered clockwise from the top-left; borders replicate. Codes
/// are stored as code/255 in the output buffer.
ImageBuffer lbp_map(const ImageBuffer& gray);

/// 1-D Wasserstein (earth mover's) distance between two normalized
/// histograms that share an ascending bin-value grid: the L1 distance
/// between CDFs weighted by bin spacing.
double wasserstein_1d(std::span<const double> p, std::span<const double> q,
                      std::span<const double> bin_values);

/// Combined Lab EMD: per-channel W1 over the region histograms (bin centers
/// in native Lab units), summed and divided by 300.
double emd_lab(const Superpixel& sp_s, const Superpixel& sp_ns);

/// 1 minus the Bhattacharyya coefficient of the LBP histograms.
double lbp_distance(const Superpixel& sp_s, const Superpixel& sp_ns);

/// |mean_a difference| / 128, in native Lab a-channel units.
double a_mean_distance(const Superpixel& sp_s, const Superpixel& sp_ns);

struct WeightParams {
    double alpha = 0.6;
    double beta = 0.3;
    double gamma = 0.1;
    double epsilon = 1e-4;
};

/// Contribution weight 1 / (alpha*D_EMD + beta*D_LBP + gamma*D_a + epsilon).
double contribution_weight(double d_emd, double d_lbp, double d_amean, const WeightParams& cfg);

/// One reference candidate scored against a shadow superpixel.
struct SimilarityBreakdown {
    int32_t ref_id = -1;
    double d_emd = 0.0;
    double d_lbp = 0.0;
    double d_amean = 0.0;
    double weight = 0.0;
};

SimilarityBreakdown score_pair(const Superpixel& sp_s, const Superpixel& sp_ns,
                               const WeightParams& cfg);

}  // namespace umbra

#endif
