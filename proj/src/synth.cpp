#include "umbra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "umbra/penumbra.hpp"
#include "umbra/png_io.hpp"

namespace umbra {

void SynthParams::validate() const {
    if (count < 1) throw ConfigError("synth: count must be >= 1");
    if (size < 96 || size % 16 != 0)
        throw ConfigError("synth: size must be a multiple of 16 and >= 96");
}

namespace {

struct Pt {
    double x, y;
};

double cross(const Pt& o, const Pt& a, const Pt& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain, CCW orientation.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Pt> hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool inside_hull(const std::vector<Pt>& hull, double x, double y) {
    for (size_t i = 0; i < hull.size(); ++i) {
        const Pt& a = hull[i];
        const Pt& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, {x, y}) < 0) return false;
    }
    return true;
}

const char* kTextureNames[3] = {"checker", "gradient", "noise"};
constexpr int kCheckerCell = 4;
constexpr int kAnnErode = 4;      // annotation shadow side = umbra eroded this much
constexpr size_t kMinAnn = 60;    // regenerate geometry below this many pixels

// Textures are noise-free at the pixel scale (the "noise" variant uses a
// smooth interpolated lattice): white per-pixel noise randomizes LBP codes on
// flat areas and that sampling noise swamps the similarity weighting.
ImageBuffer make_texture(int size, int tex, std::mt19937& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::array<double, 3> base;
    for (auto& b : base) b = 0.45 + 0.12 * u01(rng);

    ImageBuffer img(size, size, 3);
    if (tex == 0) {  // checker: two close colors, 4-px cells
        std::array<double, 3> alt;
        for (int c = 0; c < 3; ++c) alt[c] = base[c] + 0.03 + 0.03 * u01(rng);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                bool odd = ((x / kCheckerCell) + (y / kCheckerCell)) % 2 != 0;
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = static_cast<float>(odd ? alt[c] : base[c]);
            }
    } else if (tex == 1) {  // vertical gradient, so a horizontal shift preserves it
        double amp = 0.02 + 0.02 * u01(rng);
        for (int y = 0; y < size; ++y) {
            double g = 1.0 + amp * (static_cast<double>(y) / (size - 1) - 0.5);
            for (int x = 0; x < size; ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(base[c] * g);
        }
    } else {  // smooth value noise: random 8-px lattice, bilinear interpolation
        const int cell = 8;
        int nodes = size / cell + 2;
        std::vector<std::array<double, 3>> lattice(static_cast<size_t>(nodes) * nodes);
        std::uniform_real_distribution<double> amp(-0.008, 0.008);
        for (auto& node : lattice)
            for (double& v : node) v = amp(rng);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                int gx = x / cell, gy = y / cell;
                double fx = static_cast<double>(x % cell) / cell;
                double fy = static_cast<double>(y % cell) / cell;
                for (int c = 0; c < 3; ++c) {
                    double v00 = lattice[gy * nodes + gx][c];
                    double v10 = lattice[gy * nodes + gx + 1][c];
                    double v01 = lattice[(gy + 1) * nodes + gx][c];
                    double v11 = lattice[(gy + 1) * nodes + gx + 1][c];
                    double v = (1 - fy) * ((1 - fx) * v00 + fx * v10) +
                               fy * ((1 - fx) * v01 + fx * v11);
                    img.at(x, y, c) = static_cast<float>(base[c] + v);
                }
            }
    }

    for (float& v : img.data()) v = static_cast<float>(std::clamp<double>(v, 0.05, 0.95));
    return img;
}

ShadowMask rasterize_polygon(const std::vector<Pt>& hull, int size) {
    ShadowMask mask(size, size);
    double min_x = size, max_x = 0, min_y = size, max_y = 0;
    for (const Pt& p : hull) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
    int x1 = std::min(size - 1, static_cast<int>(std::ceil(max_x)) + 1);
    int y0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
    int y1 = std::min(size - 1, static_cast<int>(std::ceil(max_y)) + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (inside_hull(hull, x + 0.5, y + 0.5)) mask.at(x, y) = 1;
    return mask;
}

}  // namespace

SynthCase make_synth_case(const SynthParams& params, int index) {
    params.validate();
    if (index < 0 || index >= params.count) throw ConfigError("synth: index out of range");
    std::seed_seq sq{params.seed, static_cast<uint32_t>(index)};
    std::mt19937 rng(sq);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    SynthCase c;
    c.index = index;
    c.size = params.size;
    int tex = index % 3;
    c.texture = kTextureNames[tex];
    c.truth = make_texture(params.size, tex, rng);

    // Darkening factors: shared base with a small per-channel jitter.
    double base_f = 0.30 + 0.32 * u01(rng);
    for (int ch = 0; ch < 3; ++ch)
        c.factors[ch] = std::clamp(base_f + 0.02 * (u01(rng) - 0.5), 0.2, 0.7);

    int size = params.size;
    int shift = size / 2;  // reference offset; multiple of the checker period
    double cx_base = size * 0.24, cy_base = size * 0.5;
    double radius = size * 0.17 + size * 0.05 * u01(rng);
    double cx = cx_base + size * 0.02 * (2.0 * u01(rng) - 1.0);
    double cy = cy_base + size * 0.055 * (2.0 * u01(rng) - 1.0);

    ShadowMask eroded(1, 1);
    for (int attempt = 0;; ++attempt) {
        std::vector<Pt> pts;
        for (int i = 0; i < 12; ++i) {
            double r = radius * std::sqrt(u01(rng));
            double th = 2.0 * 3.14159265358979323846 * u01(rng);
            pts.push_back({cx + r * std::cos(th), cy + r * std::sin(th)});
        }
        c.mask = rasterize_polygon(convex_hull(std::move(pts)), size);
        eroded = morph(c.mask, kAnnErode, MorphOp::Erode);
        if (eroded.shadow_count() >= kMinAnn) break;
        if (attempt >= 8) throw ConfigError("synth: failed to place a usable polygon");
    }
    c.umbra_pixels = c.mask.shadow_count();

    // Shadowed image: full darkening inside the polygon, a 2-px linear ramp
    // just outside it, untouched beyond.
    std::vector<int32_t> dist = manhattan_distance(c.mask);
    c.shadowed = c.truth;
    auto ml = c.mask.labels();
    for (int ch = 0; ch < 3; ++ch) {
        auto p = c.shadowed.plane(ch);
        double f = c.factors[ch];
        for (size_t i = 0; i < p.size(); ++i) {
            double factor = 1.0;
            if (ml[i])
                factor = f;
            else if (dist[i] <= 2)
                factor = f + (1.0 - f) * dist[i] / 3.0;
            p[i] = static_cast<float>(std::clamp(p[i] * factor, 0.0, 1.0));
        }
    }

    // Annotation: umbra interior vs. the same pixels shifted into the lit
    // half (texture phase preserved by construction).
    RegionPair pair;
    pair.pair_id = 1;
    auto el = eroded.labels();
    for (size_t i = 0; i < el.size(); ++i)
        if (el[i]) {
            if (static_cast<int>(i % size) + shift >= size)
                throw ConfigError("synth: polygon leaked into the reference half");
            pair.shadow_pixels.push_back(static_cast<uint32_t>(i));
            pair.reference_pixels.push_back(static_cast<uint32_t>(i) + shift);
        }
    c.ann.width = size;
    c.ann.height = size;
    c.ann.pairs.push_back(std::move(pair));
    c.ann.validate();
    return c;
}

std::string synth_case_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "case_%03d", index);
    return buf;
}

void write_synth_case(const SynthCase& c, const std::string& dir) {
    std::filesystem::path base = std::filesystem::path(dir) / synth_case_name(c.index);
    save_png(c.shadowed, base.string() + ".png");
    save_png(c.truth, base.string() + "_truth.png");
    save_mask(c.mask, base.string() + "_mask.png");
    save_annotation(c.ann, base.string() + "_ann.png");

    std::ofstream meta(base.string() + "_meta.txt", std::ios::binary);
    if (!meta) throw IoError("synth: cannot write " + base.string() + "_meta.txt");
    meta << "index=" << c.index << "\n"
         << "size=" << c.size << "\n"
         << "texture=" << c.texture << "\n"
         << "factor_r=" << c.factors[0] << "\n"
         << "factor_g=" << c.factors[1] << "\n"
         << "factor_b=" << c.factors[2] << "\n"
         << "mean_factor=" << c.mean_factor() << "\n"
         << "umbra_pixels=" << c.umbra_pixels << "\n";
}

std::vector<std::string> generate_synth_suite(const SynthParams& params, const std::string& dir) {
    params.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("synth: cannot create directory " + dir);
    std::vector<std::string> names;
    for (int i = 0; i < params.count; ++i) {
        SynthCase c = make_synth_case(params, i);
        write_synth_case(c, dir);
        names.push_back(synth_case_name(i));
    }
    return names;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace umbra
