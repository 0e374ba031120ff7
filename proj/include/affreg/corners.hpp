#pragma once

#include "affreg/image.hpp"
#include "affreg/points.hpp"

namespace affreg {

struct CornerParams {
  int max_points = 60;
  double min_separation = 8.0;  // pixels
  double sigma = 1.0;           // Gaussian smoothing for gradients and tensor window
  double k = 0.04;              // corner response coefficient
};

// Structure-tensor corner detector: Gaussian-smoothed gradients, windowed
// second-moment matrix, response det(M) - k * trace(M)^2, 3x3 non-maximum
// suppression, greedy selection by descending response honoring
// min_separation, and per-axis quadratic sub-pixel refinement.
//
// Deterministic for a fixed image and parameters. Throws
// insufficient_features_error when fewer than 4 corners survive.
PointSet detect_corners(const Image& img, const CornerParams& params = {});

PointSet detect_corners(const Image& img, int max_points, double min_separation);

// Variant for images with fabricated regions (row-major flags, nonzero =
// trustworthy): responses whose support window touches an untrusted pixel
// are discarded before thresholding, so border artifacts neither win the
// point budget nor inflate the response threshold.
PointSet detect_corners(const Image& img, const CornerParams& params,
                        const std::vector<std::uint8_t>* valid);

}  // namespace affreg
