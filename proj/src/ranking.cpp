#include "mps/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "mps/resampling.hpp"

namespace mps {

namespace {

// Histogram of cell 0's final count over nsim experiments, shared by every
// p_star queried for the same (M, r, nsim, seed).
using HistKey = std::tuple<int, int, int, std::uint64_t>;

std::mutex g_cache_mutex;
std::map<DCacheKey, int> g_d_cache;
std::map<HistKey, std::vector<long long>> g_hist_cache;

std::vector<long long> simulate_first_cell(int M, int r, int nsim, std::uint64_t seed) {
  std::vector<long long> hist(static_cast<std::size_t>(r) + 1, 0);
  const int key[] = {M, r};
  std::uniform_int_distribution<int> cell(0, M - 1);
  std::vector<int> counts(static_cast<std::size_t>(M));
  for (int h = 0; h < nsim; ++h) {
    Engine rng = make_stream(seed, "rule-r", key, static_cast<std::uint64_t>(h));
    std::fill(counts.begin(), counts.end(), 0);
    while (true) {
      const int k = cell(rng);
      if (++counts[k] == r) break;
    }
    ++hist[counts[0]];
  }
  return hist;
}

long long required_successes(int nsim, double p_star) {
  // ceil(nsim * p_star) without 0.95 * 100000 rounding up to 95001.
  const double target = static_cast<double>(nsim) * p_star;
  return static_cast<long long>(std::ceil(target - 1e-9 * std::max(1.0, target)));
}

}  // namespace

void RuleRConfig::validate() const {
  if (r < 1) throw std::invalid_argument("rule R: r must be >= 1");
  if (M < 1) throw std::invalid_argument("rule R: M must be >= 1");
  if (D < 0 || D > r) throw std::invalid_argument("rule R: D must lie in [0, r]");
}

std::vector<int> sample_until_max(int M, int r, const std::function<int()>& cell_sampler) {
  RuleRConfig{r, 0, M}.validate();
  std::vector<int> counts(static_cast<std::size_t>(M), 0);
  while (true) {
    const int k = cell_sampler();
    if (k < 0 || k >= M)
      throw std::out_of_range("sample_until_max: sampler returned cell " + std::to_string(k) +
                              " outside [0, " + std::to_string(M) + ")");
    if (++counts[k] == r) return counts;
  }
}

IndexList select_cells(std::span<const int> counts, int r, int D, ThresholdMode mode) {
  RuleRConfig{r, D, static_cast<int>(counts.size())}.validate();
  if (*std::max_element(counts.begin(), counts.end()) != r)
    throw std::invalid_argument("select_cells: max(counts) must equal r");
  IndexList out;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const int c = counts[k];
    const bool pass = mode == ThresholdMode::inclusive ? c >= r - D : (c > r - D || c == r);
    if (pass) out.push_back(static_cast<int>(k));
  }
  return out;
}

int find_min_D(int M, int r, double p_star, int nsim, std::uint64_t seed) {
  RuleRConfig{r, 0, M}.validate();
  if (!(p_star > 0.0 && p_star <= 1.0)) throw std::invalid_argument("find_min_D: p_star must lie in (0, 1]");
  if (nsim < 1) throw std::invalid_argument("find_min_D: nsim must be >= 1");

  const DCacheKey key{M, r, p_star, nsim, seed};
  const HistKey hkey{M, r, nsim, seed};
  std::vector<long long> hist;
  {
    std::lock_guard lock(g_cache_mutex);
    if (auto it = g_d_cache.find(key); it != g_d_cache.end()) return it->second;
    if (auto it = g_hist_cache.find(hkey); it != g_hist_cache.end()) hist = it->second;
  }
  if (hist.empty()) hist = simulate_first_cell(M, r, nsim, seed);

  const long long need = required_successes(nsim, p_star);
  long long covered = 0;
  int D = r;
  for (int d = 0; d <= r; ++d) {
    covered += hist[static_cast<std::size_t>(r - d)];
    if (covered >= need) {
      D = d;
      break;
    }
  }

  std::lock_guard lock(g_cache_mutex);
  g_hist_cache[hkey] = std::move(hist);
  g_d_cache[key] = D;
  return D;
}

double exact_pcs(int M, int r, int D, std::size_t state_cap) {
  RuleRConfig{r, D, M}.validate();
  double states = std::pow(static_cast<double>(r), M);
  if (states > static_cast<double>(state_cap))
    throw std::length_error("exact_pcs: state space r^M = " + std::to_string(states) + " exceeds cap");

  const auto total = static_cast<std::size_t>(states);
  std::vector<std::size_t> stride(static_cast<std::size_t>(M));
  stride[0] = 1;
  for (int k = 1; k < M; ++k) stride[k] = stride[k - 1] * static_cast<std::size_t>(r);

  // Every transition increments one digit, so ascending index order is a
  // topological order of the absorbing chain.
  std::vector<double> prob(total, 0.0);
  prob[0] = 1.0;
  const double step = 1.0 / M;
  double success = 0.0;
  std::vector<int> c(static_cast<std::size_t>(M));
  for (std::size_t idx = 0; idx < total; ++idx) {
    const double p = prob[idx];
    if (p == 0.0) continue;
    std::size_t rest = idx;
    for (int k = 0; k < M; ++k) {
      c[k] = static_cast<int>(rest % static_cast<std::size_t>(r));
      rest /= static_cast<std::size_t>(r);
    }
    for (int k = 0; k < M; ++k) {
      if (c[k] + 1 == r) {
        const int first = k == 0 ? r : c[0];
        if (first >= r - D) success += p * step;
      } else {
        prob[idx + stride[k]] += p * step;
      }
    }
  }
  return std::min(success, 1.0);
}

int exact_min_D(int M, int r, double p_star) {
  for (int d = 0; d <= r; ++d)
    if (exact_pcs(M, r, d) >= p_star - 1e-12) return d;
  return r;
}

std::vector<DCacheEntry> d_cache_snapshot() {
  std::lock_guard lock(g_cache_mutex);
  std::vector<DCacheEntry> out;
  out.reserve(g_d_cache.size());
  for (const auto& [k, d] : g_d_cache) out.push_back({k, d});
  return out;
}

void clear_d_cache() {
  std::lock_guard lock(g_cache_mutex);
  g_d_cache.clear();
  g_hist_cache.clear();
}

}  // namespace mps
