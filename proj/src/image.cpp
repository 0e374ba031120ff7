#include "affreg/image.hpp"

#include <numeric>

namespace affreg {

std::size_t MaskedImage::mask_true_count() const {
  std::size_t n = 0;
  for (std::uint8_t m : mask) n += m != 0;
  return n;
}

double MaskedImage::overlap_fraction() const {
  if (mask.empty()) return 0.0;
  return static_cast<double>(mask_true_count()) / static_cast<double>(mask.size());
}

}  // namespace affreg
