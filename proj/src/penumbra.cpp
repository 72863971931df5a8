#include "umbra/penumbra.hpp"

#include <algorithm>

namespace umbra {

std::vector<int32_t> manhattan_distance(const ShadowMask& sources) {
    const int w = sources.width(), h = sources.height();
    std::vector<int32_t> dist(sources.pixel_count(), kUnreachable);
    auto src = sources.labels();
    for (size_t i = 0; i < dist.size(); ++i)
        if (src[i]) dist[i] = 0;
    // forward pass
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (x > 0) dist[i] = std::min(dist[i], dist[i - 1] + 1);
            if (y > 0) dist[i] = std::min(dist[i], dist[i - w] + 1);
        }
    }
    // backward pass
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (x < w - 1) dist[i] = std::min(dist[i], dist[i + 1] + 1);
            if (y < h - 1) dist[i] = std::min(dist[i], dist[i + w] + 1);
        }
    }
    return dist;
}

ShadowMask morph(const ShadowMask& mask, int r, MorphOp op) {
    if (r < 0) throw ConfigError("morph: negative radius");
    const int w = mask.width(), h = mask.height();
    ShadowMask out(w, h);
    if (r == 0) {
        out = mask;
        return out;
    }
    if (op == MorphOp::Dilate) {
        // dist to the nearest shadow pixel <= r
        auto dist = manhattan_distance(mask);
        auto labels = out.labels();
        for (size_t i = 0; i < dist.size(); ++i) labels[i] = dist[i] <= r ? 1 : 0;
        return out;
    }
    // Erode: survive iff every L1-neighbor within r is shadow, where anything
    // beyond the image border counts as non-shadow.
    ShadowMask nonshadow(w, h);
    {
        auto in = mask.labels();
        auto ns = nonshadow.labels();
        for (size_t i = 0; i < in.size(); ++i) ns[i] = in[i] ? 0 : 1;
    }
    auto dist = manhattan_distance(nonshadow);
    auto in = mask.labels();
    auto labels = out.labels();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            int32_t border = std::min(std::min(x + 1, y + 1), std::min(w - x, h - y));
            labels[i] = (in[i] && std::min(dist[i], border) > r) ? 1 : 0;
        }
    }
    return out;
}

PenumbraBand extract_penumbra(const ShadowMask& mask, int r) {
    PenumbraBand pb;
    pb.radius = r;
    const int w = mask.width(), h = mask.height();
    ShadowMask dilated = morph(mask, r, MorphOp::Dilate);
    ShadowMask eroded = morph(mask, r, MorphOp::Erode);

    pb.band = ShadowMask(w, h);
    {
        auto d = dilated.labels();
        auto e = eroded.labels();
        auto b = pb.band.labels();
        for (size_t i = 0; i < b.size(); ++i) b[i] = (d[i] && !e[i]) ? 1 : 0;
    }

    // Distance references; degenerate cases (fully eroded core, fully covered
    // image) fall back to the original mask so band distances stay finite.
    ShadowMask inner_ref = eroded.shadow_count() > 0 ? eroded : mask;
    ShadowMask outer_ref(w, h);
    {
        auto d = dilated.labels();
        auto o = outer_ref.labels();
        for (size_t i = 0; i < o.size(); ++i) o[i] = d[i] ? 0 : 1;
    }
    if (outer_ref.shadow_count() == 0) {
        auto m = mask.labels();
        auto o = outer_ref.labels();
        for (size_t i = 0; i < o.size(); ++i) o[i] = m[i] ? 0 : 1;
    }
    pb.dist_inner = inner_ref.shadow_count() > 0 ? manhattan_distance(inner_ref)
                                                 : std::vector<int32_t>(mask.pixel_count(), 0);
    pb.dist_outer = outer_ref.shadow_count() > 0 ? manhattan_distance(outer_ref)
                                                 : std::vector<int32_t>(mask.pixel_count(), 0);
    return pb;
}

ImageBuffer smooth_boundary(const ImageBuffer& original, const ImageBuffer& relit,
                            const PenumbraBand& band) {
    if (!original.same_shape(relit))
        throw DimensionError("smooth_boundary: original/relit shape mismatch");
    if (band.band.width() != original.width() || band.band.height() != original.height())
        throw DimensionError("smooth_boundary: band shape mismatch");

    const int w = original.width(), h = original.height();
    auto bl = band.band.labels();
    ImageBuffer blend = relit;
    for (int c = 0; c < original.channels(); ++c) {
        auto po = original.plane(c);
        auto pr = relit.plane(c);
        auto pb = blend.plane(c);
        for (size_t i = 0; i < po.size(); ++i) {
            if (!bl[i]) continue;
            double di = band.dist_inner[i];
            double dout = band.dist_outer[i];
            double denom = di + dout;
            double t = denom > 0.0 ? dout / denom : 0.5;
            pb[i] = static_cast<float>(t * pr[i] + (1.0 - t) * po[i]);
        }
    }

    // One 3x3 mean pass over band pixels; non-band neighbors contribute their
    // unfiltered blend values, off-image neighbors replicate.
    ImageBuffer out = blend;
    for (int c = 0; c < original.channels(); ++c) {
        auto pb = blend.plane(c);
        auto po = out.plane(c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                size_t i = static_cast<size_t>(y) * w + x;
                if (!bl[i]) continue;
                double sum = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    int yy = std::clamp(y + dy, 0, h - 1);
                    for (int dx = -1; dx <= 1; ++dx) {
                        int xx = std::clamp(x + dx, 0, w - 1);
                        sum += pb[static_cast<size_t>(yy) * w + xx];
                    }
                }
                po[i] = static_cast<float>(sum / 9.0);
            }
        }
    }
    return out;
}

}  // namespace umbra
