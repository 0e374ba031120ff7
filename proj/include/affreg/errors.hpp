#pragma once

#include <stdexcept>
#include <string>

namespace affreg {

// Base for everything thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// File missing or unreadable.
class io_error : public error {
 public:
  using error::error;
};

// File exists but is not a format we read.
class unsupported_format_error : public error {
 public:
  using error::error;
};

// File claims a supported format but its contents are broken
// (empty file, bad header, truncated raster, malformed CSV row).
class corrupt_file_error : public error {
 public:
  using error::error;
};

// Bad configuration or command usage.
class config_error : public error {
 public:
  using error::error;
};

class singular_transform_error : public error {
 public:
  using error::error;
};

class empty_point_set_error : public error {
 public:
  using error::error;
};

class insufficient_features_error : public error {
 public:
  using error::error;
};

class insufficient_overlap_error : public error {
 public:
  using error::error;
};

class degenerate_signal_error : public error {
 public:
  using error::error;
};

class control_point_mismatch_error : public error {
 public:
  using error::error;
};

// No valid Pareto-optimal individual survived to the end of phase 2.
class registration_failed_error : public error {
 public:
  using error::error;
};

// A synthetic case lost too much of the frame to be usable.
class case_rejected_error : public error {
 public:
  using error::error;
};

}  // namespace affreg
