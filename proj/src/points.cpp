#include "affreg/points.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "affreg/errors.hpp"

namespace affreg {

namespace {

bool parse_number(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  return std::isfinite(out);
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

PointSet load_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open point file: " + path.string());

  PointSet out;
  out.source = PointSource::manual;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;

    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw corrupt_file_error(path.string() + ": malformed row at line " +
                               std::to_string(line_no) + " (expected \"x,y\")");
    }
    double x = 0.0, y = 0.0;
    if (!parse_number(t.substr(0, comma), x) || !parse_number(t.substr(comma + 1), y)) {
      throw corrupt_file_error(path.string() + ": non-numeric field at line " +
                               std::to_string(line_no));
    }
    out.points.push_back({x, y});
  }

  if (out.points.empty()) {
    throw corrupt_file_error(path.string() + ": no points (empty file)");
  }
  return out;
}

void save_points(const PointSet& pts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write point file: " + path.string());
  char buf[80];
  for (const Point& p : pts.points) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.x, p.y);
    out << buf;
  }
}

PointSet apply(const AffineMatrix& m, const PointSet& pts) {
  PointSet out;
  out.source = pts.source;
  out.points.reserve(pts.points.size());
  for (const Point& p : pts.points) out.points.push_back(m.apply(p));
  return out;
}

PointSet apply(const Transform& t, const PointSet& pts, const Point& center) {
  return apply(compose_matrix(t, center), pts);
}

}  // namespace affreg
