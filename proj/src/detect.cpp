#include "umbra/detect.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "umbra/color.hpp"

namespace umbra {

void DetectConfig::validate() const {
    if (!(value_percentile > 0.0 && value_percentile < 1.0))
        throw ConfigError("detect: value_percentile must lie in (0,1)");
    if (sat_min < 0.0) throw ConfigError("detect: sat_min must be >= 0");
    if (min_component < 0) throw ConfigError("detect: min_component must be >= 0");
}

ShadowMask threshold_candidates(const ImageBuffer& img, const DetectConfig& cfg) {
    cfg.validate();
    ImageBuffer hsv = rgb_to_hsv(img);
    auto s = hsv.plane(1);
    auto v = hsv.plane(2);

    // Nearest-rank quantile of the V plane.
    std::vector<float> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    size_t rank = static_cast<size_t>(
        std::ceil(cfg.value_percentile * static_cast<double>(sorted.size())));
    rank = std::clamp<size_t>(rank, 1, sorted.size());
    float q = sorted[rank - 1];

    ShadowMask out(img.width(), img.height());
    auto m = out.labels();
    for (size_t i = 0; i < m.size(); ++i) {
        bool dark = v[i] < q;
        bool chromatic_or_deep = s[i] >= cfg.sat_min || v[i] < q * 0.5f;
        m[i] = (dark && chromatic_or_deep) ? 1 : 0;
    }
    return out;
}

namespace {
void drop_small_components(ShadowMask& mask, int min_component) {
    if (min_component <= 1) return;
    int w = mask.width(), h = mask.height();
    auto m = mask.labels();
    std::vector<uint8_t> seen(m.size(), 0);
    std::vector<uint32_t> stack, member;
    for (size_t start = 0; start < m.size(); ++start) {
        if (!m[start] || seen[start]) continue;
        stack.assign(1, static_cast<uint32_t>(start));
        member.clear();
        seen[start] = 1;
        while (!stack.empty()) {
            uint32_t i = stack.back();
            stack.pop_back();
            member.push_back(i);
            int x = static_cast<int>(i) % w, y = static_cast<int>(i) / w;
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int nx = x + dx[k], ny = y + dy[k];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                uint32_t ni = static_cast<uint32_t>(ny) * w + nx;
                if (m[ni] && !seen[ni]) {
                    seen[ni] = 1;
                    stack.push_back(ni);
                }
            }
        }
        if (member.size() < static_cast<size_t>(min_component))
            for (uint32_t i : member) m[i] = 0;
    }
}

// 3x3 square dilation/erosion; outside-image counts as non-shadow.
ShadowMask square3(const ShadowMask& mask, bool dilate) {
    int w = mask.width(), h = mask.height();
    ShadowMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool hit = !dilate;
            for (int dy = -1; dy <= 1 && (dilate ? !hit : hit); ++dy)
                for (int dx = -1; dx <= 1 && (dilate ? !hit : hit); ++dx) {
                    int nx = x + dx, ny = y + dy;
                    bool v = nx >= 0 && ny >= 0 && nx < w && ny < h && mask.at(nx, ny);
                    if (dilate)
                        hit = hit || v;
                    else
                        hit = hit && v;
                }
            out.at(x, y) = hit ? 1 : 0;
        }
    return out;
}
}  // namespace

ShadowMask detect_shadows(const ImageBuffer& img, const DetectConfig& cfg) {
    ShadowMask mask = threshold_candidates(img, cfg);
    drop_small_components(mask, cfg.min_component);
    return square3(square3(mask, true), false);  // one closing
}

}  // namespace umbra
