#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

namespace aprobe {

using Json = nlohmann::json;

// Canonical text: object keys sorted, two-space indent, shortest round-trip
// float formatting, trailing newline. Equal values always give equal bytes.
std::string canonical_dump(const Json& value);

Json parse_canonical(std::string_view text);

// Non-finite doubles have no JSON literal; they travel as strings.
Json number_to_json(double value);
double number_from_json(const Json& value);

// 64-bit FNV-1a. Stable across platforms, used for fingerprints and cache keys.
class Fnv1a {
 public:
  Fnv1a& add_bytes(const void* data, std::size_t size);
  Fnv1a& add(std::string_view text);
  Fnv1a& add(std::uint64_t value);
  Fnv1a& add(double value);
  Fnv1a& add(std::span<const double> values);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 14695981039346656037ull;
};

std::string to_hex(std::uint64_t value);

}  // namespace aprobe
