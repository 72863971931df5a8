#include "umbra/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "umbra/color.hpp"

namespace umbra {

namespace {

struct Cluster {
    double L = 0, a = 0, b = 0;
    double row = 0, col = 0;
};

// Snap a continuous seed position to the nearest free region pixel by
// scanning outward in Chebyshev rings.
int64_t snap_seed(double srow, double scol, const ShadowMask& mask, uint8_t cls, int w, int h,
                  const std::vector<uint8_t>& taken) {
    int cy = std::clamp(static_cast<int>(std::lround(srow)), 0, h - 1);
    int cx = std::clamp(static_cast<int>(std::lround(scol)), 0, w - 1);
    int max_r = std::max(w, h);
    for (int r = 0; r <= max_r; ++r) {
        int64_t best = -1;
        double best_d = std::numeric_limits<double>::max();
        int y0 = cy - r, y1 = cy + r, x0 = cx - r, x1 = cx + r;
        auto consider = [&](int y, int x) {
            if (y < 0 || y >= h || x < 0 || x >= w) return;
            size_t i = static_cast<size_t>(y) * w + x;
            if (mask.labels()[i] != cls || taken[i]) return;
            double d = (y - srow) * (y - srow) + (x - scol) * (x - scol);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int64_t>(i);
            }
        };
        if (r == 0) {
            consider(cy, cx);
        } else {
            for (int x = x0; x <= x1; ++x) {
                consider(y0, x);
                consider(y1, x);
            }
            for (int y = y0 + 1; y <= y1 - 1; ++y) {
                consider(y, x0);
                consider(y, x1);
            }
        }
        if (best >= 0) return best;
    }
    return -1;
}

// Segment one mask class; appends clusters and writes labels (offset by
// id_base) into `labels`. Returns the number of clusters created.
int segment_region(const ImageBuffer& lab, const ShadowMask& mask, uint8_t cls, int target_size,
                   const SlicParams& params, int id_base, std::vector<int32_t>& labels) {
    const int w = mask.width(), h = mask.height();
    auto ml = mask.labels();
    auto Lp = lab.plane(0), Ap = lab.plane(1), Bp = lab.plane(2);

    std::vector<uint32_t> region_pixels;
    int ry0 = h, ry1 = -1, rx0 = w, rx1 = -1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (ml[i] != cls) continue;
            region_pixels.push_back(static_cast<uint32_t>(i));
            ry0 = std::min(ry0, y);
            ry1 = std::max(ry1, y);
            rx0 = std::min(rx0, x);
            rx1 = std::max(rx1, x);
        }
    if (region_pixels.empty()) return 0;

    const size_t count = region_pixels.size();
    const int K = static_cast<int>((count + target_size - 1) / target_size);
    const double S = std::sqrt(static_cast<double>(target_size));
    const double m2_over_S2 = (params.compactness * params.compactness) / (S * S);

    // K seeds on a near-square grid over the region bounding box, snapped to
    // distinct region pixels.
    const double bw = rx1 - rx0 + 1, bh = ry1 - ry0 + 1;
    int grid_rows = std::max(1, static_cast<int>(std::lround(std::sqrt(K * bh / bw))));
    grid_rows = std::min(grid_rows, K);
    std::vector<Cluster> clusters;
    clusters.reserve(K);
    {
        std::vector<uint8_t> taken(labels.size(), 0);
        int base = K / grid_rows, extra = K % grid_rows;
        int placed = 0;
        for (int gy = 0; gy < grid_rows; ++gy) {
            int row_seeds = base + (gy < extra ? 1 : 0);
            double srow = ry0 + (gy + 0.5) * bh / grid_rows;
            for (int gx = 0; gx < row_seeds; ++gx) {
                double scol = rx0 + (gx + 0.5) * bw / row_seeds;
                int64_t pix = snap_seed(srow, scol, mask, cls, w, h, taken);
                if (pix < 0) continue;  // region exhausted (count < K impossible)
                taken[pix] = 1;
                Cluster c;
                c.row = static_cast<double>(pix / w);
                c.col = static_cast<double>(pix % w);
                c.L = Lp[pix];
                c.a = Ap[pix];
                c.b = Bp[pix];
                clusters.push_back(c);
                ++placed;
            }
        }
        (void)placed;
    }
    const int Kr = static_cast<int>(clusters.size());

    std::vector<float> best(labels.size(), std::numeric_limits<float>::max());
    std::vector<int32_t> assign(labels.size(), -1);
    const int half = static_cast<int>(std::ceil(1.5 * S));

    for (int iter = 0; iter < params.iterations; ++iter) {
        std::fill(best.begin(), best.end(), std::numeric_limits<float>::max());
        std::fill(assign.begin(), assign.end(), -1);
        for (int k = 0; k < Kr; ++k) {
            const Cluster& c = clusters[k];
            int y0 = std::max(0, static_cast<int>(c.row) - half);
            int y1 = std::min(h - 1, static_cast<int>(c.row) + half);
            int x0 = std::max(0, static_cast<int>(c.col) - half);
            int x1 = std::min(w - 1, static_cast<int>(c.col) + half);
            for (int y = y0; y <= y1; ++y) {
                size_t rowbase = static_cast<size_t>(y) * w;
                for (int x = x0; x <= x1; ++x) {
                    size_t i = rowbase + x;
                    if (ml[i] != cls) continue;
                    double dL = Lp[i] - c.L, dA = Ap[i] - c.a, dB = Bp[i] - c.b;
                    double dy = y - c.row, dx = x - c.col;
                    double d2 = dL * dL + dA * dA + dB * dB + (dy * dy + dx * dx) * m2_over_S2;
                    float d2f = static_cast<float>(d2);
                    if (d2f < best[i]) {  // ties keep the lower cluster id
                        best[i] = d2f;
                        assign[i] = k;
                    }
                }
            }
        }
        // Region pixels outside every search window: nearest center wins.
        for (uint32_t i : region_pixels) {
            if (assign[i] >= 0) continue;
            int y = static_cast<int>(i) / w, x = static_cast<int>(i) % w;
            double bd = std::numeric_limits<double>::max();
            int bk = 0;
            for (int k = 0; k < Kr; ++k) {
                const Cluster& c = clusters[k];
                double dL = Lp[i] - c.L, dA = Ap[i] - c.a, dB = Bp[i] - c.b;
                double dy = y - c.row, dx = x - c.col;
                double d2 = dL * dL + dA * dA + dB * dB + (dy * dy + dx * dx) * m2_over_S2;
                if (d2 < bd) {
                    bd = d2;
                    bk = k;
                }
            }
            assign[i] = bk;
        }
        // Update centers.
        std::vector<Cluster> sums(Kr);
        std::vector<int64_t> counts(Kr, 0);
        for (uint32_t i : region_pixels) {
            int k = assign[i];
            sums[k].L += Lp[i];
            sums[k].a += Ap[i];
            sums[k].b += Bp[i];
            sums[k].row += static_cast<double>(i / w);
            sums[k].col += static_cast<double>(i % w);
            ++counts[k];
        }
        for (int k = 0; k < Kr; ++k) {
            if (counts[k] == 0) continue;  // empty cluster keeps its center
            double n = static_cast<double>(counts[k]);
            clusters[k] = {sums[k].L / n, sums[k].a / n, sums[k].b / n, sums[k].row / n,
                           sums[k].col / n};
        }
    }

    // Merge small disconnected fragments into the adjacent same-class cluster
    // with the nearest mean Lab color. A merge can strand pixels a dissolving
    // cluster adopted earlier in the pass, so repeat until a pass changes
    // nothing (two passes in practice; the cap is a safety net).
    for (int pass = 0, changed = 1; pass < 32 && changed; ++pass) {
        changed = 0;
        std::vector<int32_t> comp(labels.size(), -1);
        std::vector<std::vector<uint32_t>> comp_pixels;
        std::vector<int32_t> comp_label;
        std::vector<uint32_t> stack;
        for (uint32_t start : region_pixels) {
            if (comp[start] >= 0) continue;
            int32_t cid = static_cast<int32_t>(comp_pixels.size());
            comp_pixels.emplace_back();
            comp_label.push_back(assign[start]);
            stack.push_back(start);
            comp[start] = cid;
            while (!stack.empty()) {
                uint32_t i = stack.back();
                stack.pop_back();
                comp_pixels[cid].push_back(i);
                int y = static_cast<int>(i) / w, x = static_cast<int>(i) % w;
                const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    int ny = y + dy[d], nx = x + dx[d];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    uint32_t j = static_cast<uint32_t>(ny) * w + nx;
                    if (ml[j] != cls || comp[j] >= 0 || assign[j] != assign[start]) continue;
                    comp[j] = cid;
                    stack.push_back(j);
                }
            }
        }
        // Any component below target_size/4 dissolves into an adjacent
        // same-class cluster with the nearest mean Lab color. Clusters that
        // are themselves at least target_size/4 are preferred as hosts, so a
        // chain of small clusters (e.g. along a thin dark seam) cannot keep
        // each other alive by absorbing one another.
        const size_t min_fragment = std::max<size_t>(1, target_size / 4);
        std::vector<int64_t> cluster_size(Kr, 0);
        for (uint32_t i : region_pixels) ++cluster_size[assign[i]];
        for (size_t cid = 0; cid < comp_pixels.size(); ++cid) {
            int k = comp_label[cid];
            if (comp_pixels[cid].size() >= min_fragment) continue;
            // fragment mean Lab
            double fl = 0, fa = 0, fb = 0;
            for (uint32_t i : comp_pixels[cid]) {
                fl += Lp[i];
                fa += Ap[i];
                fb += Bp[i];
            }
            double n = static_cast<double>(comp_pixels[cid].size());
            fl /= n;
            fa /= n;
            fb /= n;
            // adjacent same-class clusters; big hosts beat small ones
            double bd = std::numeric_limits<double>::max();
            int bk = -1;
            bool bk_big = false;
            for (uint32_t i : comp_pixels[cid]) {
                int y = static_cast<int>(i) / w, x = static_cast<int>(i) % w;
                const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    int ny = y + dy[d], nx = x + dx[d];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    size_t j = static_cast<size_t>(ny) * w + nx;
                    if (ml[j] != cls || assign[j] == k) continue;
                    int cand = assign[j];
                    bool cand_big = cluster_size[cand] >= static_cast<int64_t>(min_fragment);
                    const Cluster& c = clusters[cand];
                    double d2 = (fl - c.L) * (fl - c.L) + (fa - c.a) * (fa - c.a) +
                                (fb - c.b) * (fb - c.b);
                    bool better = cand_big != bk_big
                                      ? cand_big
                                      : (d2 < bd || (d2 == bd && cand < bk));
                    if (better) {
                        bd = d2;
                        bk = cand;
                        bk_big = cand_big;
                    }
                }
            }
            if (bk < 0) {
                // No adjacent same-class cluster (e.g. a sliver cut off by the
                // other class). Fall back to the nearest cluster in Lab over the
                // whole region so no tiny isolated cluster survives.
                for (int cand = 0; cand < Kr; ++cand) {
                    if (cand == k || cluster_size[cand] <= 0) continue;
                    bool cand_big = cluster_size[cand] >= static_cast<int64_t>(min_fragment);
                    const Cluster& c = clusters[cand];
                    double d2 = (fl - c.L) * (fl - c.L) + (fa - c.a) * (fa - c.a) +
                                (fb - c.b) * (fb - c.b);
                    bool better = cand_big != bk_big
                                      ? cand_big
                                      : (d2 < bd || (d2 == bd && cand < bk));
                    if (better) {
                        bd = d2;
                        bk = cand;
                        bk_big = cand_big;
                    }
                }
            }
            if (bk >= 0) {
                for (uint32_t i : comp_pixels[cid]) assign[i] = bk;
                cluster_size[k] -= static_cast<int64_t>(comp_pixels[cid].size());
                cluster_size[bk] += static_cast<int64_t>(comp_pixels[cid].size());
                changed = 1;
            }
        }
    }

    // Compact cluster ids (dropping any left empty) and publish labels.
    std::vector<int64_t> final_counts(Kr, 0);
    for (uint32_t i : region_pixels) ++final_counts[assign[i]];
    std::vector<int32_t> remap(Kr, -1);
    int next = 0;
    for (int k = 0; k < Kr; ++k)
        if (final_counts[k] > 0) remap[k] = next++;
    for (uint32_t i : region_pixels) labels[i] = id_base + remap[assign[i]];
    return next;
}

}  // namespace

SuperpixelMap slic_masked(const ImageBuffer& img_rgb, const ShadowMask& mask, int target_size,
                          const SlicParams& params) {
    if (!mask.same_shape(img_rgb)) throw DimensionError("slic_masked: image/mask size mismatch");
    if (target_size < 16) throw ConfigError("slic_masked: target_size must be >= 16");

    ImageBuffer lab = img_rgb.channels() == 3 ? rgb_to_lab(img_rgb) : ImageBuffer();
    if (img_rgb.channels() == 1) {
        // grayscale input: treat intensity as L, zero chroma
        lab = ImageBuffer(img_rgb.width(), img_rgb.height(), 3);
        auto g = img_rgb.plane(0);
        auto L = lab.plane(0);
        for (size_t i = 0; i < g.size(); ++i) L[i] = g[i] * 100.0f;
    }

    SuperpixelMap map;
    map.width = mask.width();
    map.height = mask.height();
    map.labels.assign(map.pixel_count(), -1);

    int n_shadow = segment_region(lab, mask, 1, target_size, params, 0, map.labels);
    int n_nonshadow = segment_region(lab, mask, 0, target_size, params, n_shadow, map.labels);

    map.regions.resize(static_cast<size_t>(n_shadow) + n_nonshadow);
    for (size_t k = 0; k < map.regions.size(); ++k) {
        map.regions[k].id = static_cast<int32_t>(k);
        map.regions[k].cls =
            k < static_cast<size_t>(n_shadow) ? RegionClass::Shadow : RegionClass::Nonshadow;
    }
    for (size_t i = 0; i < map.labels.size(); ++i)
        map.regions[map.labels[i]].pixels.push_back(static_cast<uint32_t>(i));
    for (auto& sp : map.regions) {
        double sr = 0, sc = 0;
        for (uint32_t i : sp.pixels) {
            sr += static_cast<double>(i / map.width);
            sc += static_cast<double>(i % map.width);
        }
        sp.centroid_row = sr / sp.pixels.size();
        sp.centroid_col = sc / sp.pixels.size();
    }
    return map;
}

SuperpixelMap make_map_from_labels(std::vector<int32_t> labels, int width, int height) {
    SuperpixelMap map;
    map.width = width;
    map.height = height;
    map.labels = std::move(labels);
    if (map.labels.size() != map.pixel_count())
        throw DimensionError("make_map_from_labels: label raster size mismatch");
    int32_t maxid = -1;
    for (int32_t l : map.labels) {
        if (l < 0) throw ConfigError("make_map_from_labels: negative label");
        maxid = std::max(maxid, l);
    }
    map.regions.resize(maxid + 1);
    for (int32_t k = 0; k <= maxid; ++k) map.regions[k].id = k;
    for (size_t i = 0; i < map.labels.size(); ++i)
        map.regions[map.labels[i]].pixels.push_back(static_cast<uint32_t>(i));
    for (auto& sp : map.regions) {
        if (sp.pixels.empty()) throw ConfigError("make_map_from_labels: empty label id");
        double sr = 0, sc = 0;
        for (uint32_t i : sp.pixels) {
            sr += static_cast<double>(i / width);
            sc += static_cast<double>(i % width);
        }
        sp.centroid_row = sr / sp.pixels.size();
        sp.centroid_col = sc / sp.pixels.size();
    }
    return map;
}

void classify_superpixels(SuperpixelMap& map, const ShadowMask& mask) {
    if (mask.width() != map.width || mask.height() != map.height)
        throw DimensionError("classify_superpixels: mask size mismatch");
    auto ml = mask.labels();
    for (auto& sp : map.regions) {
        size_t shadow = 0;
        for (uint32_t i : sp.pixels) shadow += ml[i];
        sp.cls = (static_cast<double>(shadow) / sp.pixels.size() > 0.8) ? RegionClass::Shadow
                                                                        : RegionClass::Nonshadow;
    }
}

double lab_bin_center(int channel, int bin, int bins) {
    double lo = kLabRangeLo[channel], hi = kLabRangeHi[channel];
    return lo + (bin + 0.5) * (hi - lo) / bins;
}

void compute_region_stats(const ImageBuffer& img_rgb, const ImageBuffer& img_lab,
                          const ImageBuffer& img_lbp, SuperpixelMap& map, const StatsConfig& cfg) {
    if (img_rgb.width() != map.width || img_rgb.height() != map.height ||
        img_lab.width() != map.width || img_lab.height() != map.height ||
        img_lbp.width() != map.width || img_lbp.height() != map.height)
        throw DimensionError("compute_region_stats: raster size mismatch");
    if (img_lab.channels() != 3 || img_lbp.channels() != 1)
        throw DimensionError("compute_region_stats: lab must be 3ch, lbp 1ch");

    auto lbp = img_lbp.plane(0);
    for (auto& sp : map.regions) {
        if (sp.pixels.empty()) throw ConfigError("compute_region_stats: empty superpixel");
        const double n = static_cast<double>(sp.pixels.size());
        for (int c = 0; c < 3; ++c) {
            sp.lab_hist[c].assign(cfg.lab_bins, 0.0);
            auto rgb_p = img_rgb.plane(img_rgb.channels() == 3 ? c : 0);
            auto lab_p = img_lab.plane(c);
            double rsum = 0, lsum = 0;
            for (uint32_t i : sp.pixels) {
                rsum += rgb_p[i];
                double v = lab_p[i];
                lsum += v;
                int bin = static_cast<int>((v - kLabRangeLo[c]) * cfg.lab_bins /
                                           (kLabRangeHi[c] - kLabRangeLo[c]));
                sp.lab_hist[c][std::clamp(bin, 0, cfg.lab_bins - 1)] += 1.0;
            }
            sp.mean_rgb[c] = rsum / n;
            sp.mean_lab[c] = lsum / n;
            for (double& v : sp.lab_hist[c]) v /= n;
        }
        sp.mean_a = sp.mean_lab[1];
        sp.lbp_hist.assign(cfg.lbp_bins, 0.0);
        for (uint32_t i : sp.pixels) {
            int code = static_cast<int>(std::lround(lbp[i] * 255.0f));
            int bin = code * cfg.lbp_bins / 256;
            sp.lbp_hist[std::clamp(bin, 0, cfg.lbp_bins - 1)] += 1.0;
        }
        for (double& v : sp.lbp_hist) v /= n;
    }
}

ImageBuffer colorize_labels(const SuperpixelMap& map, uint32_t seed) {
    ImageBuffer out(map.width, map.height, 3);
    auto color_of = [seed](int32_t id) {
        uint32_t x = static_cast<uint32_t>(id) * 2654435761u + seed * 0x9e3779b9u;
        x ^= x >> 16;
        x *= 0x45d9f3bu;
        x ^= x >> 16;
        return x;
    };
    for (size_t i = 0; i < map.labels.size(); ++i) {
        uint32_t c = color_of(map.labels[i]);
        out.plane(0)[i] = ((c >> 16) & 0xff) / 255.0f;
        out.plane(1)[i] = ((c >> 8) & 0xff) / 255.0f;
        out.plane(2)[i] = (c & 0xff) / 255.0f;
    }
    return out;
}

void dump_regions(const SuperpixelMap& map, std::ostream& os) {
    for (const auto& sp : map.regions) {
        os << "id=" << sp.id << " class=" << (sp.cls == RegionClass::Shadow ? "shadow" : "nonshadow")
           << " size=" << sp.pixels.size() << " centroid=" << sp.centroid_row << ","
           << sp.centroid_col << " mean_rgb=" << sp.mean_rgb[0] << "," << sp.mean_rgb[1] << ","
           << sp.mean_rgb[2] << " mean_lab=" << sp.mean_lab[0] << "," << sp.mean_lab[1] << ","
           << sp.mean_lab[2] << "\n";
    }
}

}  // namespace umbra
