#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace alab::io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T byteswap_if_big(T x) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &x, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&x, b, sizeof(T));
  }
  return x;
}

template <class T>
void write_le(std::ostream& out, T x) {
  x = byteswap_if_big(x);
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
T read_le(std::istream& in) {
  T x{};
  in.read(reinterpret_cast<char*>(&x), sizeof x);
  return byteswap_if_big(x);
}

inline void write_f64s(std::ostream& out, const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) write_le(out, p[i]);
  }
}

inline void read_f64s(std::istream& in, double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = read_le<double>(in);
  }
}

/// 17 significant digits, enough to round-trip any double.
inline std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace alab::io
