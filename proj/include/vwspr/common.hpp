#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace vwspr {

/// Raised for malformed input, violated preconditions and numerical failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index into a corpus' ordered class labels.
using ClassId = std::size_t;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 64-bit FNV-1a, used for vocabulary fingerprints in checkpoints.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace vwspr
