#include "mps/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace mps {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::span<const int> path,
                          std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char c : tag) h = mix(h, c);
  h = mix(h, 0x100 + path.size());
  for (int v : path) h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  return mix(h, index);
}

Engine make_stream(std::uint64_t seed, std::string_view tag, std::span<const int> path,
                   std::uint64_t index) {
  return Engine(derive_seed(seed, tag, path, index));
}

int subsample_size(int n, double gamma) {
  if (n < 1) throw std::invalid_argument("subsample_size: n must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("subsample_size: gamma must lie in (0, 1]");
  // Guard against pow() landing just below an exact integer (e.g. 10000^0.5).
  const auto m = static_cast<long long>(std::floor(std::pow(static_cast<double>(n), gamma) + 1e-9));
  return static_cast<int>(std::clamp<long long>(m, 1, n));
}

IndexList draw_subsample(int n, int m, Engine& rng) {
  if (m < 1 || m > n) throw std::invalid_argument("draw_subsample: need 1 <= m <= n");
  IndexList all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  // Selection sampling over a forward range keeps the output ascending.
  IndexList out;
  out.reserve(static_cast<std::size_t>(m));
  std::sample(all.begin(), all.end(), std::back_inserter(out), m, rng);
  return out;
}

IndexList draw_bootstrap(int n, Engine& rng) {
  if (n < 1) throw std::invalid_argument("draw_bootstrap: n must be >= 1");
  std::uniform_int_distribution<int> pick(0, n - 1);
  IndexList out(static_cast<std::size_t>(n));
  for (auto& i : out) i = pick(rng);
  return out;
}

int ResamplePlan::size(int n) const {
  switch (scheme) {
    case Scheme::subsample:
      return subsample_size(n, gamma);
    case Scheme::half_sample:
      return std::max(1, n / 2);
    case Scheme::bootstrap:
      return n;
  }
  return n;
}

IndexList ResamplePlan::draw(int n, Engine& rng) const {
  if (scheme == Scheme::bootstrap) return draw_bootstrap(n, rng);
  return draw_subsample(n, size(n), rng);
}

std::string ResamplePlan::name() const {
  switch (scheme) {
    case Scheme::subsample:
      return "subsample";
    case Scheme::half_sample:
      return "half_sample";
    case Scheme::bootstrap:
      return "bootstrap";
  }
  return "unknown";
}

ResamplePlan::Scheme parse_scheme(std::string_view name) {
  if (name == "subsample") return ResamplePlan::Scheme::subsample;
  if (name == "half_sample" || name == "half-sample") return ResamplePlan::Scheme::half_sample;
  if (name == "bootstrap") return ResamplePlan::Scheme::bootstrap;
  throw std::invalid_argument("unknown resampling scheme '" + std::string(name) + "'");
}

DiagnosticResult selection_proportion_diagnostic(std::span<const int> n_values, int B, int reps,
                                                 const ResamplePlan& plan, std::size_t threads) {
  if (B < 1 || reps < 1) throw std::invalid_argument("diagnostic: B and reps must be >= 1");
  DiagnosticResult result;
  const std::string scheme = plan.name();

  for (int n : n_values) {
    if (n < 2) throw std::invalid_argument("diagnostic: every n must be >= 2");
    std::vector<double> props(static_cast<std::size_t>(reps));

    parallel_for(props.size(), threads, [&](std::size_t rep) {
      const int key[] = {n};
      Engine data_rng = make_stream(plan.seed, "diagnostic-data", key, rep);
      std::normal_distribution<double> normal;
      std::vector<double> x1(n), x2(n), y(n);
      for (int i = 0; i < n; ++i) {
        x1[i] = normal(data_rng);
        x2[i] = normal(data_rng);
        y[i] = x1[i] + x2[i] + normal(data_rng);
      }

      Engine rs_rng = make_stream(plan.seed, "diagnostic-" + scheme, key, rep);
      int wins = 0;
      for (int b = 0; b < B; ++b) {
        const IndexList idx = plan.draw(n, rs_rng);
        const double m = static_cast<double>(idx.size());
        double s1 = 0, s2 = 0, sy = 0;
        for (int i : idx) {
          s1 += x1[i];
          s2 += x2[i];
          sy += y[i];
        }
        s1 /= m;
        s2 /= m;
        sy /= m;
        double c1 = 0, c2 = 0, v1 = 0, v2 = 0;
        for (int i : idx) {
          const double a = x1[i] - s1, c = x2[i] - s2, e = y[i] - sy;
          c1 += a * e;
          c2 += c * e;
          v1 += a * a;
          v2 += c * c;
        }
        // |corr(X1,Y)| > |corr(X2,Y)|  <=>  c1^2 / v1 > c2^2 / v2
        if (c1 * c1 * v2 > c2 * c2 * v1) ++wins;
      }
      props[rep] = static_cast<double>(wins) / B;
    });

    for (int rep = 0; rep < reps; ++rep) result.rows.push_back({scheme, n, rep, props[rep]});
    result.summary.push_back({scheme, n, mean_of(props), sd_of(props)});
  }
  return result;
}

void write_diagnostic_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
  out << "scheme,n,rep,proportion\n";
  for (const auto& r : rows) out << r.scheme << ',' << r.n << ',' << r.rep << ',' << r.proportion << '\n';
}

}  // namespace mps
