#ifndef UMBRA_IMAGE_HPP
#define UMBRA_IMAGE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace umbra {

// Thrown on unreadable/unwritable files and unsupported encodings.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when raster dimensions or channel counts do not match a contract.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed configuration files or out-of-range parameter values.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Planar raster of 1 or 3 float channels. Pixel data lives in [0,1] for
/// RGB/gray/HSV content; Lab content keeps native ranges (L in [0,100],
/// a/b around [-128,127]). Values may exceed [0,1] transiently while
/// relighting, before the final clamp.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, int channels, float fill = 0.0f)
        : width_(width), height_(height), channels_(channels) {
        if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
            throw DimensionError("ImageBuffer: bad dimensions " + std::to_string(width) + "x" +
                                 std::to_string(height) + "x" + std::to_string(channels));
        data_.assign(static_cast<size_t>(width) * height * channels, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
    float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

    // One full channel plane, row-major.
    std::span<const float> plane(int c) const {
        return {data_.data() + static_cast<size_t>(c) * pixel_count(), pixel_count()};
    }
    std::span<float> plane(int c) {
        return {data_.data() + static_cast<size_t>(c) * pixel_count(), pixel_count()};
    }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    bool same_shape(const ImageBuffer& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

    bool operator==(const ImageBuffer& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_ &&
               data_ == o.data_;
    }

private:
    size_t index(int x, int y, int c) const {
        return (static_cast<size_t>(c) * height_ + y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Binary per-pixel shadow labels: 1 = shadow, 0 = non-shadow.
class ShadowMask {
public:
    ShadowMask() = default;
    ShadowMask(int width, int height, uint8_t fill = 0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw DimensionError("ShadowMask: bad dimensions");
        labels_.assign(static_cast<size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return labels_.size(); }

    uint8_t at(int x, int y) const { return labels_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t& at(int x, int y) { return labels_[static_cast<size_t>(y) * width_ + x]; }

    std::span<const uint8_t> labels() const { return labels_; }
    std::span<uint8_t> labels() { return labels_; }

    size_t shadow_count() const {
        size_t n = 0;
        for (uint8_t v : labels_) n += v;
        return n;
    }

    bool same_shape(const ShadowMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }
    bool same_shape(const ImageBuffer& img) const {
        return width_ == img.width() && height_ == img.height();
    }

    bool operator==(const ShadowMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && labels_ == o.labels_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> labels_;
};

}  // namespace umbra

#endif
