#ifndef UMBRA_PNG_IO_HPP
#define UMBRA_PNG_IO_HPP

#include <string>

#include "umbra/image.hpp"

namespace umbra {

/// Loads an 8-bit RGB or grayscale PNG; alpha, if present, is stripped.
/// Values are scaled by 1/255. Palette and 16-bit files are rejected.
ImageBuffer load_png(const std::string& path);

/// Writes an 8-bit PNG (gray for 1 channel, RGB for 3). Values are clamped
/// to [0,1] and scaled by 255 with round-half-up.
void save_png(const ImageBuffer& img, const std::string& path);

/// Mask PNG convention: pixel >= 128 reads as shadow; writes 255/0.
ShadowMask load_mask(const std::string& path);
void save_mask(const ShadowMask& mask, const std::string& path);

}  // namespace umbra

#endif
