#include "affreg/corners.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace affreg {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with replicated borders.
Image gaussian_blur(const Image& src, const std::vector<double>& kernel) {
  const int w = src.width();
  const int h = src.height();
  const int radius = static_cast<int>(kernel.size() / 2);

  Image tmp(w, h);
  for (int y = 0; y < h; ++y) {
    const double* in = src.row(y);
    double* out = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::clamp(x + i, 0, w - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * in[xi];
      }
      out[x] = acc;
    }
  }

  Image dst(w, h);
  for (int y = 0; y < h; ++y) {
    double* out = dst.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::clamp(y + i, 0, h - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(x, yi);
      }
      out[x] = acc;
    }
  }
  return dst;
}

struct Candidate {
  double response;
  int x;
  int y;
  double rx;  // refined
  double ry;
};

// Parabolic vertex offset from three samples; 0 on flat neighborhoods.
double quadratic_offset(double prev, double center, double next) {
  const double denom = prev + next - 2.0 * center;
  if (denom >= 0.0) return 0.0;  // not a strict local max along this axis
  return std::clamp((prev - next) / (2.0 * denom), -0.5, 0.5);
}

}  // namespace

PointSet detect_corners(const Image& img, const CornerParams& params,
                        const std::vector<std::uint8_t>* valid) {
  if (img.width() < 8 || img.height() < 8) {
    throw insufficient_features_error("detect_corners: image smaller than 8x8");
  }
  if (params.max_points < 4) {
    throw config_error("detect_corners: max_points must be at least 4");
  }
  if (valid != nullptr && valid->size() != img.size()) {
    throw config_error("detect_corners: validity mask size mismatch");
  }

  const int w = img.width();
  const int h = img.height();
  const std::vector<double> kernel = gaussian_kernel(params.sigma);
  const int radius = static_cast<int>(kernel.size() / 2);

  const Image smooth = gaussian_blur(img, kernel);

  // Central-difference gradients and their products.
  Image ixx(w, h), iyy(w, h), ixy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      const double gx = 0.5 * (smooth.at(xp, y) - smooth.at(xm, y));
      const double gy = 0.5 * (smooth.at(x, yp) - smooth.at(x, ym));
      ixx.at(x, y) = gx * gx;
      iyy.at(x, y) = gy * gy;
      ixy.at(x, y) = gx * gy;
    }
  }
  ixx = gaussian_blur(ixx, kernel);
  iyy = gaussian_blur(iyy, kernel);
  ixy = gaussian_blur(ixy, kernel);

  Image response(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = ixx.at(x, y), b = ixy.at(x, y), c = iyy.at(x, y);
      response.at(x, y) = (a * c - b * b) - params.k * (a + c) * (a + c);
    }
  }

  if (valid != nullptr) {
    // Responses draw on a window of roughly twice the smoothing radius;
    // zero every response whose window touches an untrusted pixel so
    // fabricated structure cannot outscore real corners.
    const int reach = 2 * radius + 2;
    std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
      const std::uint8_t* vrow = valid->data() + static_cast<std::size_t>(y) * w;
      std::uint32_t* srow = sat.data() + static_cast<std::size_t>(y + 1) * (w + 1);
      const std::uint32_t* prow = sat.data() + static_cast<std::size_t>(y) * (w + 1);
      std::uint32_t run = 0;
      for (int x = 0; x < w; ++x) {
        if (vrow[x] == 0) ++run;
        srow[x + 1] = prow[x + 1] + run;
      }
    }
    auto invalid_in = [&](int x0, int y0, int x1, int y1) {  // inclusive box
      x0 = std::max(x0, 0);
      y0 = std::max(y0, 0);
      x1 = std::min(x1, w - 1);
      y1 = std::min(y1, h - 1);
      const auto at = [&](int x, int y) {
        return sat[static_cast<std::size_t>(y) * (w + 1) + x];
      };
      return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0) > 0;
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (invalid_in(x - reach, y - reach, x + reach, y + reach)) response.at(x, y) = 0.0;
      }
    }
  }

  double max_response = 0.0;
  for (const double r : response.data()) max_response = std::max(max_response, r);

  if (max_response <= 0.0) {
    throw insufficient_features_error("detect_corners: no corner response (flat image?)");
  }

  // 3x3 non-maximum suppression inside a border margin where the smoothing
  // window is fully supported.
  const double threshold = 1e-3 * max_response;
  const int margin = std::max(radius + 1, 2);
  std::vector<Candidate> candidates;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const double r = response.at(x, y);
      if (r <= threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (response.at(x + dx, y + dy) >= r) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;

      Candidate c{r, x, y, 0.0, 0.0};
      c.rx = x + quadratic_offset(response.at(x - 1, y), r, response.at(x + 1, y));
      c.ry = y + quadratic_offset(response.at(x, y - 1), r, response.at(x, y + 1));
      candidates.push_back(c);
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  PointSet out;
  out.source = PointSource::automatic;
  const double min_sep2 = params.min_separation * params.min_separation;
  for (const Candidate& c : candidates) {
    if (out.points.size() >= static_cast<std::size_t>(params.max_points)) break;
    bool clear = true;
    for (const Point& p : out.points) {
      if (squared_distance(p, {c.rx, c.ry}) < min_sep2) {
        clear = false;
        break;
      }
    }
    if (clear) out.points.push_back({c.rx, c.ry});
  }

  if (out.points.size() < 4) {
    throw insufficient_features_error("detect_corners: found " +
                                      std::to_string(out.points.size()) +
                                      " corners, need at least 4");
  }
  return out;
}

PointSet detect_corners(const Image& img, const CornerParams& params) {
  return detect_corners(img, params, nullptr);
}

PointSet detect_corners(const Image& img, int max_points, double min_separation) {
  CornerParams p;
  p.max_points = max_points;
  p.min_separation = min_separation;
  return detect_corners(img, p, nullptr);
}

}  // namespace affreg
