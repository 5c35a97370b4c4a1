#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace alab {

/// FNV-1a, 64 bit. Used for cache keys and output provenance; not a
/// cryptographic hash.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void f64(double x) { bytes(&x, sizeof x); }
  void i64(std::int64_t x) { bytes(&x, sizeof x); }
  void u64(std::uint64_t x) { bytes(&x, sizeof x); }
  void f64s(std::span<const double> xs) { bytes(xs.data(), xs.size_bytes()); }

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex_hash(std::uint64_t h);

}  // namespace alab
