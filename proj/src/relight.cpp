#include "umbra/relight.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <thread>

#include "umbra/color.hpp"

namespace umbra {

namespace {
constexpr double kMinDenom = 1.0 / 255.0;

void parallel_over(size_t count, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || count < 2) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(threads, static_cast<int>(count));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}
}  // namespace

void RelightConfig::validate() const {
    if (n_neighbors < 1) throw ConfigError("relight: n_neighbors must be >= 1");
    if (alpha < 0 || beta < 0 || gamma < 0) throw ConfigError("relight: weights must be >= 0");
    if (epsilon <= 0) throw ConfigError("relight: epsilon must be > 0");
    if (fallback_threshold <= 0) throw ConfigError("relight: fallback_threshold must be > 0");
    if (fallback_top_k < 1) throw ConfigError("relight: fallback_top_k must be >= 1");
    if (superpixel_size < 16) throw ConfigError("relight: superpixel_size must be >= 16");
}

std::vector<int32_t> nearest_nonshadow(const SuperpixelMap& map, const Superpixel& sp, int n) {
    std::vector<std::pair<double, int32_t>> dists;
    for (const auto& cand : map.regions) {
        if (cand.cls != RegionClass::Nonshadow) continue;
        double dr = cand.centroid_row - sp.centroid_row;
        double dc = cand.centroid_col - sp.centroid_col;
        dists.emplace_back(dr * dr + dc * dc, cand.id);
    }
    size_t keep = std::min<size_t>(n, dists.size());
    std::partial_sort(dists.begin(), dists.begin() + keep, dists.end());
    std::vector<int32_t> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(dists[i].second);
    return out;
}

std::array<double, 3> superpixel_ratio(const Superpixel& sp_s, const Superpixel& sp_ns) {
    std::array<double, 3> r{};
    for (int c = 0; c < 3; ++c) {
        double denom = std::max(sp_s.mean_rgb[c], kMinDenom);
        r[c] = (sp_ns.mean_rgb[c] - sp_s.mean_rgb[c]) / denom;
    }
    return r;
}

std::array<double, 3> aggregate_ratio(const std::vector<std::array<double, 3>>& ratios,
                                      const std::vector<double>& weights,
                                      const RelightConfig& cfg) {
    if (ratios.empty() || ratios.size() != weights.size())
        throw std::invalid_argument("aggregate_ratio: list size mismatch");
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::array<double, 3> r{};
    for (size_t i = 0; i < ratios.size(); ++i) {
        double wi = weights[i];
        if (cfg.normalize_weights) wi = wsum > 0.0 ? wi / wsum : 1.0 / ratios.size();
        for (int c = 0; c < 3; ++c) r[c] += ratios[i][c] * wi;
    }
    return r;
}

void relight_superpixel(ImageBuffer& img, const Superpixel& sp,
                        const std::array<double, 3>& ratio) {
    for (int c = 0; c < img.channels(); ++c) {
        auto p = img.plane(c);
        double scale = ratio[c] + 1.0;
        for (uint32_t i : sp.pixels)
            p[i] = static_cast<float>(std::clamp(scale * p[i], 0.0, 1.0));
    }
}

ReferenceSelection select_references(const SuperpixelMap& map, const Superpixel& sp_s,
                                     const RelightConfig& cfg) {
    ReferenceSelection sel;
    WeightParams wp = cfg.weight_params();
    std::vector<int32_t> local = nearest_nonshadow(map, sp_s, cfg.n_neighbors);
    double max_w = 0.0;
    std::vector<double> local_w;
    local_w.reserve(local.size());
    for (int32_t id : local) {
        double w = score_pair(sp_s, map.regions[id], wp).weight;
        local_w.push_back(w);
        max_w = std::max(max_w, w);
    }
    if (!local.empty() && max_w >= cfg.fallback_threshold) {
        sel.ref_ids = std::move(local);
        sel.weights = std::move(local_w);
        return sel;
    }
    // Material mismatch: widen to a similarity-weighted global search.
    sel.fallback_used = true;
    std::vector<std::pair<double, int32_t>> scored;  // (-weight, id) for tie-stable sort
    for (const auto& cand : map.regions) {
        if (cand.cls != RegionClass::Nonshadow) continue;
        scored.emplace_back(-score_pair(sp_s, cand, wp).weight, cand.id);
    }
    size_t keep = std::min<size_t>(cfg.fallback_top_k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());
    for (size_t i = 0; i < keep; ++i) {
        sel.ref_ids.push_back(scored[i].second);
        sel.weights.push_back(-scored[i].first);
    }
    return sel;
}

RemovalResult remove_shadows(const ImageBuffer& img, const ShadowMask& mask,
                             const RelightConfig& cfg, int threads,
                             const std::vector<int32_t>* order) {
    if (!mask.same_shape(img)) throw DimensionError("remove_shadows: image/mask size mismatch");
    if (img.channels() != 3) throw DimensionError("remove_shadows: expected RGB input");
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();

    RemovalResult res;
    res.image = img;

    size_t shadow_px = mask.shadow_count();
    auto finish = [&]() {
        res.report.duration_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    };
    if (shadow_px == 0) {
        finish();
        return res;
    }
    if (shadow_px == mask.pixel_count()) {
        res.report.diagnostic = "mask covers the whole image; no non-shadow reference exists";
        finish();
        return res;
    }

    res.map = slic_masked(img, mask, cfg.superpixel_size);

    // Preliminary global relight: per-channel ratio between global non-shadow
    // and shadow means, applied to a working copy whose only purpose is to
    // make shadow-side features comparable with lit references.
    std::array<double, 3> global_ratio{};
    {
        auto ml = mask.labels();
        for (int c = 0; c < 3; ++c) {
            auto p = img.plane(c);
            double s_sum = 0, ns_sum = 0;
            for (size_t i = 0; i < p.size(); ++i)
                (ml[i] ? s_sum : ns_sum) += p[i];
            double s_mean = s_sum / static_cast<double>(shadow_px);
            double ns_mean = ns_sum / static_cast<double>(p.size() - shadow_px);
            global_ratio[c] = (ns_mean - s_mean) / std::max(s_mean, kMinDenom);
        }
        ImageBuffer working = img;
        for (int c = 0; c < 3; ++c) {
            auto p = working.plane(c);
            double scale = global_ratio[c] + 1.0;
            for (size_t i = 0; i < p.size(); ++i)
                if (ml[i]) p[i] = static_cast<float>(std::clamp(scale * p[i], 0.0, 1.0));
        }
        ImageBuffer lab_w = rgb_to_lab(working);
        ImageBuffer lbp_w = lbp_map(rgb_to_gray(working));
        compute_region_stats(img, lab_w, lbp_w, res.map);
    }

    std::vector<int32_t> shadow_ids;
    bool have_nonshadow = false;
    for (const auto& sp : res.map.regions) {
        if (sp.cls == RegionClass::Shadow)
            shadow_ids.push_back(sp.id);
        else
            have_nonshadow = true;
    }
    if (!have_nonshadow) {
        res.report.diagnostic = "no non-shadow superpixels; cannot relight";
        finish();
        return res;
    }

    std::vector<int32_t> sequence = order ? *order : shadow_ids;
    {
        std::vector<int32_t> sorted = sequence;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != shadow_ids)
            throw ConfigError("remove_shadows: order must list every shadow superpixel once");
    }

    // Each shadow superpixel reads immutable stats and writes a disjoint
    // pixel set, so both processing order and thread schedule leave the
    // output bit-identical.
    std::vector<RelightRecord> records(sequence.size());
    parallel_over(sequence.size(), threads, [&](size_t idx) {
        const Superpixel& sp = res.map.regions[sequence[idx]];
        ReferenceSelection sel = select_references(res.map, sp, cfg);
        std::vector<std::array<double, 3>> ratios;
        ratios.reserve(sel.ref_ids.size());
        for (int32_t id : sel.ref_ids) ratios.push_back(superpixel_ratio(sp, res.map.regions[id]));
        std::array<double, 3> r = aggregate_ratio(ratios, sel.weights, cfg);
        relight_superpixel(res.image, sp, r);
        RelightRecord& rec = records[idx];
        rec.sp_id = sp.id;
        rec.ref_ids = std::move(sel.ref_ids);
        rec.weights = std::move(sel.weights);
        rec.ratio = r;
        rec.fallback_used = sel.fallback_used;
    });

    std::sort(records.begin(), records.end(),
              [](const RelightRecord& a, const RelightRecord& b) { return a.sp_id < b.sp_id; });
    for (const auto& rec : records)
        if (rec.fallback_used) ++res.report.fallback_count;
    res.report.records = std::move(records);
    finish();
    return res;
}

void write_report(const RelightReport& report, std::ostream& os) {
    os << "# shadow_superpixels=" << report.records.size()
       << " fallback_count=" << report.fallback_count << " duration_ms=" << report.duration_ms
       << "\n";
    if (!report.diagnostic.empty()) os << "# diagnostic: " << report.diagnostic << "\n";
    for (const auto& rec : report.records) {
        os << "sp=" << rec.sp_id << " fallback=" << (rec.fallback_used ? 1 : 0) << " r=" << rec.ratio[0]
           << "," << rec.ratio[1] << "," << rec.ratio[2] << " refs=";
        for (size_t i = 0; i < rec.ref_ids.size(); ++i)
            os << (i ? "," : "") << rec.ref_ids[i];
        os << " weights=";
        for (size_t i = 0; i < rec.weights.size(); ++i)
            os << (i ? "," : "") << rec.weights[i];
        os << "\n";
    }
}

}  // namespace umbra
