#include "umbra/features.hpp"

#include <cmath>
#include <vector>

namespace umbra {

ImageBuffer lbp_map(const ImageBuffer& gray) {
    if (gray.channels() != 1) throw DimensionError("lbp_map: expected single-channel input");
    const int w = gray.width(), h = gray.height();
    ImageBuffer out(w, h, 1);
    auto g = gray.plane(0);
    auto o = out.plane(0);
    // clockwise from top-left
    const int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    const int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float center = g[static_cast<size_t>(y) * w + x];
            int code = 0;
            for (int k = 0; k < 8; ++k) {
                int ny = std::clamp(y + dy[k], 0, h - 1);  // replicate border
                int nx = std::clamp(x + dx[k], 0, w - 1);
                if (g[static_cast<size_t>(ny) * w + nx] >= center) code |= 1 << k;
            }
            o[static_cast<size_t>(y) * w + x] = code / 255.0f;
        }
    }
    return out;
}

double wasserstein_1d(std::span<const double> p, std::span<const double> q,
                      std::span<const double> bin_values) {
    if (p.size() != q.size() || p.size() != bin_values.size())
        throw std::invalid_argument("wasserstein_1d: mismatched bin counts");
    if (p.empty()) throw std::invalid_argument("wasserstein_1d: empty histograms");
    double sp = 0, sq = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        if (i > 0 && bin_values[i] < bin_values[i - 1])
            throw std::invalid_argument("wasserstein_1d: bin values not ascending");
    }
    if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
        throw std::invalid_argument("wasserstein_1d: histograms not normalized");
    double dist = 0.0, cdf_gap = 0.0;
    for (size_t i = 0; i + 1 < p.size(); ++i) {
        cdf_gap += p[i] - q[i];
        dist += std::abs(cdf_gap) * (bin_values[i + 1] - bin_values[i]);
    }
    return dist;
}

double emd_lab(const Superpixel& sp_s, const Superpixel& sp_ns) {
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const int bins = static_cast<int>(sp_s.lab_hist[c].size());
        std::vector<double> centers(bins);
        for (int i = 0; i < bins; ++i) centers[i] = lab_bin_center(c, i, bins);
        total += wasserstein_1d(sp_s.lab_hist[c], sp_ns.lab_hist[c], centers);
    }
    return total / 300.0;
}

double lbp_distance(const Superpixel& sp_s, const Superpixel& sp_ns) {
    if (sp_s.lbp_hist.size() != sp_ns.lbp_hist.size())
        throw std::invalid_argument("lbp_distance: mismatched bin counts");
    double rho = 0.0;
    for (size_t i = 0; i < sp_s.lbp_hist.size(); ++i)
        rho += std::sqrt(sp_s.lbp_hist[i] * sp_ns.lbp_hist[i]);
    return 1.0 - std::min(rho, 1.0);
}

double a_mean_distance(const Superpixel& sp_s, const Superpixel& sp_ns) {
    return std::abs(sp_s.mean_a - sp_ns.mean_a) / 128.0;
}

double contribution_weight(double d_emd, double d_lbp, double d_amean, const WeightParams& cfg) {
    return 1.0 / (cfg.alpha * d_emd + cfg.beta * d_lbp + cfg.gamma * d_amean + cfg.epsilon);
}

SimilarityBreakdown score_pair(const Superpixel& sp_s, const Superpixel& sp_ns,
                               const WeightParams& cfg) {
    SimilarityBreakdown b;
    b.ref_id = sp_ns.id;
    b.d_emd = emd_lab(sp_s, sp_ns);
    b.d_lbp = lbp_distance(sp_s, sp_ns);
    b.d_amean = a_mean_distance(sp_s, sp_ns);
    b.weight = contribution_weight(b.d_emd, b.d_lbp, b.d_amean, cfg);
    return b;
}

}  // namespace umbra
