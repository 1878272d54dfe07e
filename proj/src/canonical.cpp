#include "aprobe/canonical.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aprobe {

std::string canonical_dump(const Json& value) {
  std::string out = value.dump(2, ' ', false, Json::error_handler_t::strict);
  out.push_back('\n');
  return out;
}

Json parse_canonical(std::string_view text) {
  return Json::parse(text.begin(), text.end());
}

Json number_to_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from_json(const Json& value) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("not a number literal: " + s);
  }
  return value.get<double>();
}

Fnv1a& Fnv1a::add_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= p[i];
    state_ *= 1099511628211ull;
  }
  return *this;
}

Fnv1a& Fnv1a::add(std::string_view text) {
  add(static_cast<std::uint64_t>(text.size()));
  return add_bytes(text.data(), text.size());
}

Fnv1a& Fnv1a::add(std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  return add_bytes(bytes, 8);
}

Fnv1a& Fnv1a::add(double value) {
  // +0.0 and -0.0 hash alike
  if (value == 0.0) value = 0.0;
  return add(std::bit_cast<std::uint64_t>(value));
}

Fnv1a& Fnv1a::add(std::span<const double> values) {
  add(static_cast<std::uint64_t>(values.size()));
  for (double v : values) add(v);
  return *this;
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace aprobe
