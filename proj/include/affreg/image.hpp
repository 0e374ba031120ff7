#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "affreg/errors.hpp"

namespace affreg {

// Row-major grayscale raster. Intensities are stored as doubles (nominal
// range [0, 255]) so similarity sums carry no quantization; 8-bit input
// bytes map to their exact values. Immutable use after construction is
// safe across threads.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0)
      : width_(width), height_(height), data_(checked_extent(width, height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  const double* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
  double* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

  bool same_size(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }

 private:
  // Validates before the data vector is sized, so a negative dimension
  // cannot turn into a huge size_t allocation.
  static std::size_t checked_extent(int width, int height) {
    if (width <= 0 || height <= 0) throw error("image dimensions must be positive");
    return static_cast<std::size_t>(width) * height;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Image plus a validity mask; mask-false pixels hold intensity 0 and are
// excluded from all similarity sums.
struct MaskedImage {
  Image image;
  std::vector<std::uint8_t> mask;  // same length as image.data()

  MaskedImage() = default;
  explicit MaskedImage(int width, int height)
      : image(width, height, 0.0),
        mask(static_cast<std::size_t>(width) * height, 0) {}

  int width() const { return image.width(); }
  int height() const { return image.height(); }

  std::size_t mask_true_count() const;
  double overlap_fraction() const;
};

// Bilinear interpolation of the four surrounding pixels; empty when (x, y)
// falls outside [0, width-1] x [0, height-1]. Exact at lattice points.
inline std::optional<double> sample_bilinear(const Image& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  if (!(x >= 0.0 && x <= w - 1 && y >= 0.0 && y <= h - 1)) return std::nullopt;

  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = x0 + 1 < w ? x0 + 1 : w - 1;
  const int y1 = y0 + 1 < h ? y0 + 1 : h - 1;
  const double fx = x - x0;
  const double fy = y - y0;

  const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bot = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace affreg
