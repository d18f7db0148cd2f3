#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace qcert {

/// 64-bit FNV-1a, used to fingerprint tables and problems in archived results.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view text) {
    update(text.data(), text.size());
    update_value(text.size());
  }
  template <typename T>
  void update_value(const T& value) {
    update(&value, sizeof(T));
  }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace qcert
