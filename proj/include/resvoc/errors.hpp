#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace resvoc {

// Thrown when an operation needs a nonzero-energy frame and got silence.
class degenerate_frame_error : public std::domain_error {
 public:
  explicit degenerate_frame_error(const std::string& msg) : std::domain_error(msg) {}
};

// Base for file-format problems. `offset` is the byte position the reader had
// reached when it gave up (0 when the position is not meaningful).
class io_error : public std::runtime_error {
 public:
  io_error(const std::string& msg, uint64_t offset = 0)
      : std::runtime_error(offset ? msg + " (byte " + std::to_string(offset) + ")" : msg),
        offset_(offset) {}
  uint64_t offset() const { return offset_; }

 private:
  uint64_t offset_;
};

class bad_magic_error : public io_error {
 public:
  using io_error::io_error;
};

class version_error : public io_error {
 public:
  using io_error::io_error;
};

class truncated_error : public io_error {
 public:
  using io_error::io_error;
};

class checksum_error : public io_error {
 public:
  using io_error::io_error;
};

class parse_error : public io_error {
 public:
  using io_error::io_error;
};

}  // namespace resvoc
