#include "umbra/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "umbra/color.hpp"

namespace umbra {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

inline uint8_t to_byte(float v) {
    double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<uint8_t>(std::floor(c * 255.0 + 0.5));
}

}  // namespace

ImageBuffer load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw IoError(path + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": libpng init failed");
    }
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": PNG decode error");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": palette PNGs are not supported");
    }
    if (depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": unsupported bit depth " + std::to_string(depth));
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": unsupported channel count " + std::to_string(channels));
    }

    std::vector<uint8_t> rows(static_cast<size_t>(w) * h * channels);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        row_ptrs[y] = rows.data() + static_cast<size_t>(y) * w * channels;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageBuffer img(static_cast<int>(w), static_cast<int>(h), channels);
    for (int c = 0; c < channels; ++c) {
        auto plane = img.plane(c);
        for (size_t i = 0; i < img.pixel_count(); ++i)
            plane[i] = rows[i * channels + c] / 255.0f;
    }
    return img;
}

void save_png(const ImageBuffer& img, const std::string& path) {
    if (img.pixel_count() == 0) throw IoError("save_png: empty image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path + ": libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path + ": PNG encode error");
    }
    png_init_io(png, fp.get());
    int color = img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.width(), img.height(), 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    int ch = img.channels();
    std::vector<uint8_t> row(static_cast<size_t>(img.width()) * ch);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < ch; ++c)
                row[static_cast<size_t>(x) * ch + c] = to_byte(img.at(x, y, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ShadowMask load_mask(const std::string& path) {
    ImageBuffer img = load_png(path);
    const ImageBuffer* gray = &img;
    ImageBuffer tmp;
    if (img.channels() == 3) {
        tmp = rgb_to_gray(img);
        gray = &tmp;
    }
    ShadowMask mask(gray->width(), gray->height());
    auto plane = gray->plane(0);
    auto labels = mask.labels();
    for (size_t i = 0; i < plane.size(); ++i)
        labels[i] = std::floor(plane[i] * 255.0f + 0.5f) >= 128.0f ? 1 : 0;
    return mask;
}

void save_mask(const ShadowMask& mask, const std::string& path) {
    ImageBuffer img(mask.width(), mask.height(), 1);
    auto plane = img.plane(0);
    auto labels = mask.labels();
    for (size_t i = 0; i < labels.size(); ++i) plane[i] = labels[i] ? 1.0f : 0.0f;
    save_png(img, path);
}

}  // namespace umbra
