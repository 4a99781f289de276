#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mps/common.hpp"

namespace mps {

using Engine = std::mt19937_64;

/// Derives an independent random stream from (seed, tag, path, index).
///
/// Streams are a pure function of their key, so work items may be processed
/// in any order or on any thread without changing results. `path` is usually
/// a covariate prefix in the path forest; `index` a draw or replicate number.
Engine make_stream(std::uint64_t seed, std::string_view tag,
                   std::span<const int> path = {}, std::uint64_t index = 0);

/// Hash of the same key material, for deriving child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::span<const int> path = {}, std::uint64_t index = 0);

/// floor(n^gamma), clamped to [1, n].
int subsample_size(int n, double gamma);

/// m distinct indices in [0, n), uniform without replacement, ascending.
IndexList draw_subsample(int n, int m, Engine& rng);

/// n indices in [0, n) drawn with replacement, in draw order.
IndexList draw_bootstrap(int n, Engine& rng);

struct ResamplePlan {
  enum class Scheme { subsample, half_sample, bootstrap };

  Scheme scheme = Scheme::subsample;
  double gamma = 0.5;  // subsample only
  std::uint64_t seed = 0;

  /// Resample size for a dataset of n rows.
  int size(int n) const;
  IndexList draw(int n, Engine& rng) const;
  std::string name() const;
};

ResamplePlan::Scheme parse_scheme(std::string_view name);

struct DiagnosticRow {
  std::string scheme;
  int n = 0;
  int rep = 0;
  double proportion = 0.0;
};

struct DiagnosticSummary {
  std::string scheme;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct DiagnosticResult {
  std::vector<DiagnosticRow> rows;
  std::vector<DiagnosticSummary> summary;
};

/// Bootstrap-vs-subsampling check on Y = X1 + X2 + e (all standard normal).
///
/// For each n, `reps` datasets are generated; on each, `B` resamples are
/// drawn under `plan` and the proportion of resamples in which X1 has the
/// larger absolute correlation with Y is recorded. Datasets depend only on
/// (plan.seed, n, rep), so different schemes see the same data.
DiagnosticResult selection_proportion_diagnostic(std::span<const int> n_values, int B, int reps,
                                                 const ResamplePlan& plan,
                                                 std::size_t threads = 1);

/// CSV with columns scheme,n,rep,proportion.
void write_diagnostic_csv(std::ostream& out, std::span<const DiagnosticRow> rows);

}  // namespace mps
