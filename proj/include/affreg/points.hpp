#pragma once

#include <filesystem>
#include <vector>

#include "affreg/geometry.hpp"
#include "affreg/transform.hpp"

namespace affreg {

enum class PointSource { manual, automatic };

// Ordered list of 2D pixel-coordinate points. Warped points may lie
// anywhere, including outside image bounds.
struct PointSet {
  std::vector<Point> points;
  PointSource source = PointSource::manual;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// CSV, one "x,y" per line, '#' comments and blank lines skipped.
// Throws io_error / corrupt_file_error with the offending line number.
PointSet load_points(const std::filesystem::path& path);

void save_points(const PointSet& pts, const std::filesystem::path& path);

// Maps every point by compose_matrix(t, center); order preserved.
PointSet apply(const Transform& t, const PointSet& pts, const Point& center);
PointSet apply(const AffineMatrix& m, const PointSet& pts);

}  // namespace affreg
