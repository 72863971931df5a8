#ifndef UMBRA_COLOR_HPP
#define UMBRA_COLOR_HPP

#include "umbra/image.hpp"

namespace umbra {

/// sRGB (gamma-encoded, [0,1]) to CIE L*a*b* under D65. Output channels keep
/// native ranges: L in [0,100], a/b roughly [-128,127], not renormalized.
ImageBuffer rgb_to_lab(const ImageBuffer& img);

/// Standard hexcone HSV. H in [0,1) wrapping, S and V in [0,1].
ImageBuffer rgb_to_hsv(const ImageBuffer& img);

ImageBuffer hsv_to_rgb(const ImageBuffer& img);

/// Luminance 0.299 R + 0.587 G + 0.114 B.
ImageBuffer rgb_to_gray(const ImageBuffer& img);

}  // namespace umbra

#endif
