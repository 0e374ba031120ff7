#include "affreg/warp.hpp"

#include "affreg/threading.hpp"

namespace affreg {

namespace {

inline void pullback_row(const Image& src, const AffineMatrix& m, int y, int out_w,
                         double* out_row, std::uint8_t* mask_row) {
  const int sw = src.width();
  const int sh = src.height();
  const double xmax = sw - 1;
  const double ymax = sh - 1;
  double sx = m.b * y + m.c;
  double sy = m.e * y + m.f;
  for (int x = 0; x < out_w; ++x, sx += m.a, sy += m.d) {
    if (sx >= 0.0 && sx <= xmax && sy >= 0.0 && sy <= ymax) {
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = x0 + 1 < sw ? x0 + 1 : sw - 1;
      const int y1 = y0 + 1 < sh ? y0 + 1 : sh - 1;
      const double fx = sx - x0;
      const double fy = sy - y0;
      const double* r0 = src.row(y0);
      const double* r1 = src.row(y1);
      const double top = (1.0 - fx) * r0[x0] + fx * r0[x1];
      const double bot = (1.0 - fx) * r1[x0] + fx * r1[x1];
      out_row[x] = (1.0 - fy) * top + fy * bot;
      mask_row[x] = 1;
    } else {
      out_row[x] = 0.0;
      mask_row[x] = 0;
    }
  }
}

}  // namespace

void pullback_serial(const Image& src, const AffineMatrix& m, MaskedImage& out) {
  const int w = out.width();
  const int h = out.height();
  for (int y = 0; y < h; ++y) {
    pullback_row(src, m, y, w, out.image.row(y), out.mask.data() + static_cast<std::size_t>(y) * w);
  }
}

void pullback_omp(const Image& src, const AffineMatrix& m, MaskedImage& out) {
  const int w = out.width();
  const int h = out.height();
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int y = 0; y < h; ++y) {
    pullback_row(src, m, y, w, out.image.row(y), out.mask.data() + static_cast<std::size_t>(y) * w);
  }
}

void pullback(const Image& src, const AffineMatrix& m, MaskedImage& out) {
  if (max_threads() > 1) {
    pullback_omp(src, m, out);
  } else {
    pullback_serial(src, m, out);
  }
}

MaskedImage warp_image(const Image& sensed, const Transform& t, int out_width, int out_height,
                       const Point& center) {
  if (out_width <= 0 || out_height <= 0) throw error("warp output dimensions must be positive");
  const AffineMatrix inv = invert(t, center);
  MaskedImage out(out_width, out_height);
  pullback(sensed, inv, out);
  return out;
}

MaskedImage warp_image(const Image& sensed, const Transform& t, int out_width, int out_height) {
  return warp_image(sensed, t, out_width, out_height, frame_center(out_width, out_height));
}

}  // namespace affreg
