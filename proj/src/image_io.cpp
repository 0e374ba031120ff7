#include "affreg/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#ifdef AFFREG_HAS_PNG
#include <png.h>
#endif

namespace affreg {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

double luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (r == g && g == b) return static_cast<double>(r);
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open image file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

// PNM header tokenizer: whitespace-separated fields, '#' comments run to
// end of line.
class PnmHeader {
 public:
  PnmHeader(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), pos_(2), name_(name) {}

  long next_int() {
    skip_separators();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw corrupt_file_error(name_ + ": corrupt header (expected integer)");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw corrupt_file_error(name_ + ": corrupt header (value too large)");
      ++pos_;
    }
    return v;
  }

  // After the maxval field exactly one whitespace byte precedes the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw corrupt_file_error(name_ + ": corrupt header (missing raster separator)");
    }
    return pos_ + 1;
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_;
  std::string name_;
};

Image load_pnm(const std::vector<std::uint8_t>& bytes, bool color, const std::string& name) {
  PnmHeader hdr(bytes, name);
  const long w = hdr.next_int();
  const long h = hdr.next_int();
  const long maxval = hdr.next_int();
  if (w <= 0 || h <= 0 || w > 65536 || h > 65536) {
    throw corrupt_file_error(name + ": corrupt header (bad dimensions)");
  }
  if (maxval <= 0 || maxval > 65535) {
    throw corrupt_file_error(name + ": corrupt header (bad maxval)");
  }
  if (maxval > 255) {
    throw unsupported_format_error(name + ": 16-bit PNM is not supported (maxval > 255)");
  }

  const std::size_t offset = hdr.raster_offset();
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  const std::size_t need = pixels * (color ? 3 : 1);
  if (bytes.size() - offset < need) {
    throw corrupt_file_error(name + ": truncated raster");
  }

  Image img(static_cast<int>(w), static_cast<int>(h));
  const std::uint8_t* p = bytes.data() + offset;
  double* out = img.data().data();
  if (color) {
    for (std::size_t i = 0; i < pixels; ++i, p += 3) out[i] = luma(p[0], p[1], p[2]);
  } else {
    for (std::size_t i = 0; i < pixels; ++i) out[i] = static_cast<double>(p[i]);
  }
  return img;
}

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

#ifdef AFFREG_HAS_PNG
Image load_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw corrupt_file_error(name + ": corrupt PNG (" + png.message + ")");
  }
  // Single-channel sources stay exact byte values; color goes through the
  // luma weights. Routing gray through the RGB path would perturb 8-bit
  // values by rounding (0.299v + 0.587v + 0.114v != v in binary).
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw corrupt_file_error(name + ": corrupt PNG (" + msg + ")");
  }

  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  const std::uint8_t* p = buf.data();
  double* out = img.data().data();
  const std::size_t pixels = img.size();
  if (color) {
    for (std::size_t i = 0; i < pixels; ++i, p += 3) out[i] = luma(p[0], p[1], p[2]);
  } else {
    for (std::size_t i = 0; i < pixels; ++i, ++p) out[i] = *p;
  }
  return img;
}
#endif

std::uint8_t to_byte(double v) {
  const double r = std::lround(v);
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::string name = path.string();
  if (bytes.empty()) throw corrupt_file_error(name + ": corrupt header (empty file)");

  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return load_pnm(bytes, false, name);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return load_pnm(bytes, true, name);
  if (has_png_signature(bytes)) {
#ifdef AFFREG_HAS_PNG
    return load_png(bytes, name);
#else
    throw unsupported_format_error(name + ": PNG support not compiled in");
#endif
  }
  throw unsupported_format_error(name + ": unsupported format (expected P5/P6 PNM or PNG)");
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write image file: " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()));
  for (int y = 0; y < img.height(); ++y) {
    const double* src = img.row(y);
    for (int x = 0; x < img.width(); ++x) row[static_cast<std::size_t>(x)] = to_byte(src[x]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw io_error("short write: " + path.string());
}

void save_png(const Image& img, const std::filesystem::path& path) {
#ifdef AFFREG_HAS_PNG
  std::vector<std::uint8_t> gray(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) gray[i] = to_byte(img.data()[i]);

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, gray.data(), 0, nullptr)) {
    throw io_error("cannot write PNG: " + path.string() + " (" + png.message + ")");
  }
#else
  (void)img;
  throw unsupported_format_error("PNG support not compiled in: " + path.string());
#endif
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".png") {
    save_png(img, path);
  } else {
    save_pgm(img, path);
  }
}

bool png_supported() {
#ifdef AFFREG_HAS_PNG
  return true;
#else
  return false;
#endif
}

}  // namespace affreg
