#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace attrinfer {

// 64-bit FNV-1a over raw bytes. Used for schema hashes and for the parameter
// and mask fingerprints that back the determinism checks.
class Fingerprint {
 public:
  Fingerprint& bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fingerprint& text(std::string_view s) {
    std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    return bytes(s.data(), s.size());
  }
  Fingerprint& number(std::uint64_t v) { return bytes(&v, sizeof v); }
  Fingerprint& values(std::span<const double> v) {
    number(v.size());
    return bytes(v.data(), v.size_bytes());
  }
  Fingerprint& flags(std::span<const std::uint8_t> v) {
    number(v.size());
    return bytes(v.data(), v.size());
  }

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fingerprint::hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace attrinfer
