#include "umbra/color.hpp"

#include <algorithm>
#include <cmath>

namespace umbra {

namespace {

void require_rgb(const ImageBuffer& img, const char* op) {
    if (img.channels() != 3)
        throw DimensionError(std::string(op) + ": expected 3-channel input, got " +
                             std::to_string(img.channels()));
}

// IEC 61966-2-1 piecewise sRGB decoding.
inline double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    return t > delta3 ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

ImageBuffer rgb_to_lab(const ImageBuffer& img) {
    require_rgb(img, "rgb_to_lab");
    // sRGB -> XYZ matrix, D65 reference white.
    constexpr double xr = 0.95047, yr = 1.0, zr = 1.08883;
    ImageBuffer out(img.width(), img.height(), 3);
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    auto L = out.plane(0), A = out.plane(1), B = out.plane(2);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        double lr = srgb_linearize(r[i]);
        double lg = srgb_linearize(g[i]);
        double lb = srgb_linearize(b[i]);
        double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb;
        double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
        double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb;
        double fx = lab_f(x / xr), fy = lab_f(y / yr), fz = lab_f(z / zr);
        L[i] = static_cast<float>(116.0 * fy - 16.0);
        A[i] = static_cast<float>(500.0 * (fx - fy));
        B[i] = static_cast<float>(200.0 * (fy - fz));
    }
    return out;
}

ImageBuffer rgb_to_hsv(const ImageBuffer& img) {
    require_rgb(img, "rgb_to_hsv");
    ImageBuffer out(img.width(), img.height(), 3);
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    auto H = out.plane(0), S = out.plane(1), V = out.plane(2);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        float mx = std::max({r[i], g[i], b[i]});
        float mn = std::min({r[i], g[i], b[i]});
        float d = mx - mn;
        float h = 0.0f;
        if (d > 0.0f) {
            if (mx == r[i])
                h = (g[i] - b[i]) / d;
            else if (mx == g[i])
                h = 2.0f + (b[i] - r[i]) / d;
            else
                h = 4.0f + (r[i] - g[i]) / d;
            h /= 6.0f;
            if (h < 0.0f) h += 1.0f;
            if (h >= 1.0f) h -= 1.0f;
        }
        H[i] = h;
        S[i] = mx > 0.0f ? d / mx : 0.0f;
        V[i] = mx;
    }
    return out;
}

ImageBuffer hsv_to_rgb(const ImageBuffer& img) {
    require_rgb(img, "hsv_to_rgb");
    ImageBuffer out(img.width(), img.height(), 3);
    auto H = img.plane(0), S = img.plane(1), V = img.plane(2);
    auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        float h = H[i] * 6.0f;
        int sector = static_cast<int>(std::floor(h)) % 6;
        if (sector < 0) sector += 6;
        float f = h - std::floor(h);
        float v = V[i], s = S[i];
        float p = v * (1.0f - s);
        float q = v * (1.0f - s * f);
        float t = v * (1.0f - s * (1.0f - f));
        float rr, gg, bb;
        switch (sector) {
            case 0: rr = v; gg = t; bb = p; break;
            case 1: rr = q; gg = v; bb = p; break;
            case 2: rr = p; gg = v; bb = t; break;
            case 3: rr = p; gg = q; bb = v; break;
            case 4: rr = t; gg = p; bb = v; break;
            default: rr = v; gg = p; bb = q; break;
        }
        r[i] = rr;
        g[i] = gg;
        b[i] = bb;
    }
    return out;
}

ImageBuffer rgb_to_gray(const ImageBuffer& img) {
    require_rgb(img, "rgb_to_gray");
    ImageBuffer out(img.width(), img.height(), 1);
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    auto y = out.plane(0);
    for (size_t i = 0; i < img.pixel_count(); ++i)
        y[i] = 0.299f * r[i] + 0.587f * g[i] + 0.114f * b[i];
    return out;
}

}  // namespace umbra
