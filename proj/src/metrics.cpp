#include "umbra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "umbra/color.hpp"
#include "umbra/png_io.hpp"

namespace umbra {

ConfusionCounts confusion(const ShadowMask& pred, const ShadowMask& gt) {
    if (!pred.same_shape(gt)) throw DimensionError("confusion: mask size mismatch");
    ConfusionCounts c;
    auto p = pred.labels();
    auto g = gt.labels();
    for (size_t i = 0; i < p.size(); ++i) {
        if (g[i]) {
            if (p[i]) ++c.tp; else ++c.fn;
        } else {
            if (p[i]) ++c.fp; else ++c.tn;
        }
    }
    return c;
}

namespace {
// tp/(tp+fn)-style ratio as a percentage. An empty denominator means the
// numerator class never occurs there; score 100 when `absent_everywhere`
// (both masks agree the class does not exist), else 0.
double ratio_pct(uint64_t num, uint64_t den, bool absent_everywhere) {
    if (den == 0) return absent_everywhere ? 100.0 : 0.0;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

DetectionMetrics detection_metrics(const ConfusionCounts& c) {
    DetectionMetrics m;
    uint64_t n = c.total();
    bool pos_absent = (c.tp + c.fn == 0) && (c.tp + c.fp == 0);  // no shadow in gt nor pred
    bool neg_absent = (c.tn + c.fp == 0) && (c.tn + c.fn == 0);
    m.accuracy = n ? 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(n) : 100.0;
    m.recall = ratio_pct(c.tp, c.tp + c.fn, pos_absent);
    m.precision = ratio_pct(c.tp, c.tp + c.fp, pos_absent);
    m.specificity = ratio_pct(c.tn, c.tn + c.fp, neg_absent);
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else
        m.f1 = pos_absent ? 100.0 : 0.0;
    m.ber = 100.0 - 0.5 * (m.recall + m.specificity);
    m.iou = ratio_pct(c.tp, c.tp + c.fp + c.fn, pos_absent);
    return m;
}

void RegionPairAnnotation::validate() const {
    if (pairs.empty()) throw IoError("annotation: no labeled region pairs");
    for (const auto& p : pairs) {
        if (p.shadow_pixels.size() < kMinPixelsPerSide ||
            p.reference_pixels.size() < kMinPixelsPerSide)
            throw IoError("annotation: pair " + std::to_string(p.pair_id) + " has fewer than " +
                          std::to_string(kMinPixelsPerSide) + " pixels on one side");
    }
}

RegionPairAnnotation load_annotation(const std::string& path) {
    ImageBuffer img = load_png(path);
    if (img.channels() != 3) throw IoError("annotation: expected an RGB PNG: " + path);
    RegionPairAnnotation ann;
    ann.width = img.width();
    ann.height = img.height();
    auto r = img.plane(0);
    auto g = img.plane(1);
    std::map<int, RegionPair> by_id;
    for (size_t i = 0; i < r.size(); ++i) {
        int id = static_cast<int>(std::lround(r[i] * 255.0f));
        if (id == 0) continue;
        RegionPair& pair = by_id[id];
        pair.pair_id = id;
        bool reference = g[i] >= 0.5f;
        (reference ? pair.reference_pixels : pair.shadow_pixels).push_back(
            static_cast<uint32_t>(i));
    }
    for (auto& [id, pair] : by_id) ann.pairs.push_back(std::move(pair));
    ann.validate();
    return ann;
}

void save_annotation(const RegionPairAnnotation& ann, const std::string& path) {
    ann.validate();
    ImageBuffer img(ann.width, ann.height, 3, 0.0f);
    auto r = img.plane(0);
    auto g = img.plane(1);
    for (const auto& pair : ann.pairs) {
        if (pair.pair_id < 1 || pair.pair_id > 255)
            throw IoError("annotation: pair id out of the 1..255 PNG range");
        float idv = static_cast<float>(pair.pair_id) / 255.0f;
        for (uint32_t i : pair.shadow_pixels) r[i] = idv;
        for (uint32_t i : pair.reference_pixels) {
            r[i] = idv;
            g[i] = 1.0f;
        }
    }
    save_png(img, path);
}

namespace {
std::array<double, 3> region_mean(const ImageBuffer& img, const std::vector<uint32_t>& pixels) {
    std::array<double, 3> m{};
    for (int c = 0; c < 3; ++c) {
        auto p = img.plane(c);
        double s = 0.0;
        for (uint32_t i : pixels) s += p[i];
        m[c] = s / static_cast<double>(pixels.size());
    }
    return m;
}

double luminance(const std::array<double, 3>& rgb) {
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

void check_annotation(const ImageBuffer& result, const RegionPairAnnotation& ann) {
    if (result.channels() != 3)
        throw DimensionError("removal metrics: expected an RGB image");
    if (result.width() != ann.width || result.height() != ann.height)
        throw DimensionError("removal metrics: image/annotation size mismatch");
    ann.validate();
}
}  // namespace

double sri(const ImageBuffer& result, const RegionPairAnnotation& ann) {
    check_annotation(result, ann);
    double acc = 0.0;
    for (const auto& pair : ann.pairs) {
        double lum_s = luminance(region_mean(result, pair.shadow_pixels));
        double lum_r = luminance(region_mean(result, pair.reference_pixels));
        double ratio = lum_r > 0.0 ? lum_s / lum_r : (lum_s > 0.0 ? 2.0 : 1.0);
        acc += std::clamp(ratio, 0.0, 2.0);
    }
    return acc / static_cast<double>(ann.pairs.size());
}

double cd(const ImageBuffer& result, const RegionPairAnnotation& ann) {
    check_annotation(result, ann);
    double acc = 0.0;
    for (const auto& pair : ann.pairs) {
        auto ms = region_mean(result, pair.shadow_pixels);
        auto mr = region_mean(result, pair.reference_pixels);
        double gap = 0.0;
        for (int c = 0; c < 3; ++c) gap += std::abs(ms[c] - mr[c]) * 255.0;
        acc += gap / 3.0;
    }
    return acc / static_cast<double>(ann.pairs.size());
}

}  // namespace umbra
