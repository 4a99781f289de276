#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mps {

inline constexpr const char* kVersion = "1.0.0";

/// Zero-based covariate (column) indices.
using IndexList = std::vector<int>;

/// Malformed or unusable input data: bad CSV cells, non-finite values,
/// duplicate names. The CLI maps this to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every candidate covariate was degenerate on the rows being scored.
class NoAdmissibleCovariate : public std::runtime_error {
 public:
  NoAdmissibleCovariate() : std::runtime_error("no admissible covariate") {}
};

/// Runs body(0..count-1) on up to `threads` workers. Exceptions are collected
/// and the one with the smallest index is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

/// Explicit request, else $MPS_THREADS, else 1.
std::size_t resolve_threads(std::optional<std::size_t> requested);

}  // namespace mps
