#pragma once

#include "affreg/image.hpp"
#include "affreg/transform.hpp"

namespace affreg {

// Fills `out` with out(p) = sample_bilinear(src, out_to_src * p); the mask
// records where sampling stayed in bounds (intensity 0 elsewhere).
//
// Rows are independent and each row steps its source coordinates the same
// way in both variants, so the serial reference and the OpenMP kernel
// produce bit-identical output for any thread count.
void pullback_serial(const Image& src, const AffineMatrix& out_to_src, MaskedImage& out);
void pullback_omp(const Image& src, const AffineMatrix& out_to_src, MaskedImage& out);

// Picks the OpenMP kernel when max_threads() > 1.
void pullback(const Image& src, const AffineMatrix& out_to_src, MaskedImage& out);

// Inverse-mapped warp of the sensed image into an out_width x out_height
// frame: out(p) = sensed(inverse(t)(p)). The rotation center defaults to
// the output frame center ((w-1)/2, (h-1)/2).
MaskedImage warp_image(const Image& sensed, const Transform& t, int out_width, int out_height);
MaskedImage warp_image(const Image& sensed, const Transform& t, int out_width, int out_height,
                       const Point& center);

inline Point frame_center(int width, int height) {
  return {0.5 * (width - 1), 0.5 * (height - 1)};
}

}  // namespace affreg
