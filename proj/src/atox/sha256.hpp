#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace atox::io {

// SHA-256 (FIPS 180-4); used for artifact manifests.
class Sha256 {
 public:
  Sha256();
  void update(std::string_view data);
  std::string hex_digest();  // finalizes

  static std::string of(std::string_view data);

 private:
  void process_block(const uint8_t* block);

  uint32_t state_[8];
  uint64_t bit_length_ = 0;
  uint8_t buffer_[64];
  size_t buffer_len_ = 0;
};

}  // namespace atox::io
