#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace curvete {

// 8-bit grayscale image with a stable id and an optional class label
// (absent for unlabelled pretext pools).
struct ImageSample {
    std::string id;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, height*width
    std::optional<int> label;

    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    void validate() const;  // H, W >= 8, pixel buffer consistent
};

// Binary PGM ("P5", maxval 255). Parse errors carry the byte offset.
ImageSample load_pgm(const std::string& path);
void save_pgm(const ImageSample& sample, const std::string& path);

// out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255); constant images
// are returned unchanged.
ImageSample histogram_equalize(const ImageSample& sample);

struct AugmentationOp {
    enum class Kind { rotate, reflect, shift, sharpen, crop, zoom };
    enum class Axis { horizontal, vertical };

    Kind kind = Kind::rotate;
    double degrees = 0.0;            // rotate, in (-180, 180]
    Axis axis = Axis::horizontal;    // reflect
    int dx = 0, dy = 0;              // shift
    int crop_x = 0, crop_y = 0, crop_w = 0, crop_h = 0;  // crop
    double zoom_factor = 1.0;        // zoom, > 0

    static AugmentationOp rotate(double degrees);
    static AugmentationOp reflect(Axis axis);
    static AugmentationOp shift(int dx, int dy);
    static AugmentationOp sharpen();
    static AugmentationOp crop(int x, int y, int w, int h);
    static AugmentationOp zoom(double factor);
};

// Deterministic; the seed is part of the contract for any future stochastic
// ops but the shipped ops are all parameter-driven.
ImageSample augment(const ImageSample& sample, const AugmentationOp& op, std::uint64_t seed = 0);

// Nearest-neighbor resize (used to normalize inputs to the manifest size).
ImageSample resize_nearest(const ImageSample& sample, int new_h, int new_w);

}  // namespace curvete
