#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mps/common.hpp"

namespace mps {

/// Which cells survive rule R once one cell has reached r.
enum class ThresholdMode {
  inclusive,  // count >= r - D
  strict,     // count >  r - D (argmax cells are always kept)
};

/// Rule R: sample a multinomial until a cell reaches r, keep cells within D of r.
struct RuleRConfig {
  int r = 1;
  int D = 0;
  int M = 1;

  void validate() const;
};

/// Memo key for find_min_D. `seed` is part of the key so that distinct
/// master seeds in one process never share a Monte-Carlo draw.
struct DCacheKey {
  int M = 1;
  int r = 1;
  double p_star = 0.95;
  int nsim = 10000;
  std::uint64_t seed = 0;

  auto operator<=>(const DCacheKey&) const = default;
};

/// Draws cells from `cell_sampler` until some cell reaches count r.
/// Returns the M counts; their maximum is exactly r and the number of draws
/// is at most M(r-1)+1. Throws std::out_of_range for a sampled cell outside [0, M).
std::vector<int> sample_until_max(int M, int r, const std::function<int()>& cell_sampler);

/// Cells (0-based, ascending) whose count passes the rule-R threshold.
/// Requires max(counts) == r.
IndexList select_cells(std::span<const int> counts, int r, int D,
                       ThresholdMode mode = ThresholdMode::inclusive);

/// Smallest slack D such that, over nsim rule-R experiments under the uniform
/// M-cell multinomial, cell 0 finishes with count >= r - D in at least
/// ceil(nsim * p_star) experiments. Memoized for the process lifetime.
int find_min_D(int M, int r, double p_star, int nsim, std::uint64_t seed);

/// Exact probability that cell 0 finishes rule R with count >= r - D under
/// the uniform M-cell multinomial. Dynamic programming over count vectors;
/// throws std::length_error when r^M exceeds `state_cap`.
double exact_pcs(int M, int r, int D, std::size_t state_cap = 50'000'000);

/// Smallest D with exact_pcs(M, r, D) >= p_star.
int exact_min_D(int M, int r, double p_star);

struct DCacheEntry {
  DCacheKey key;
  int D = 0;
};

/// Current contents of the D memo, ordered by key.
std::vector<DCacheEntry> d_cache_snapshot();
void clear_d_cache();

}  // namespace mps
