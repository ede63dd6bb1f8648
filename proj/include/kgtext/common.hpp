#pragma once

// Shared small utilities: error types, string helpers, stable hashing,
// deterministic RNG seeding.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgtext {

// Thrown for malformed inputs (CLI maps this to exit code 3).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for bad command / option combinations (exit code 2).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when optimization produces non-finite values (exit code 4).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Collapses runs of whitespace to single spaces and trims the ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // leading whitespace dropped
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// FNV-1a, 64 bit. Stable across runs and platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Derives an independent sub-seed from a base seed and a stream label, so
// different components (init, shuffling, random orders) never share a stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
  return fnv1a64(std::to_string(base) + "/" + std::string(stream));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::string_view stream) {
  return std::mt19937_64(derive_seed(base, stream));
}

template <typename T>
std::string join(const std::vector<T>& items, const std::string& sep) {
  std::ostringstream os;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << sep;
    os << items[i];
  }
  return os.str();
}

}  // namespace kgtext
