#include <random>

#include "doctest.h"
#include "mps/ranking.hpp"
#include "mps/resampling.hpp"

using namespace mps;

TEST_SUITE("ranking") {

TEST_CASE("sample_until_max") {
  int calls = 0;
  auto one = sample_until_max(1, 6, [&] { return ++calls, 0; });
  CHECK(one == std::vector<int>{6});
  CHECK(calls == 6);

  CHECK(sample_until_max(4, 7, [] { return 1; }) == std::vector<int>{0, 7, 0, 0});
  CHECK_THROWS_AS(sample_until_max(3, 2, [] { return 3; }), std::out_of_range);
  CHECK_THROWS_AS(sample_until_max(3, 2, [] { return -1; }), std::out_of_range);
}

TEST_CASE("draw count bound M(r-1)+1") {
  std::mt19937_64 rng(1);
  for (int M = 1; M <= 6; ++M)
    for (int r = 1; r <= 12; ++r)
      for (int rep = 0; rep < 50; ++rep) {
        std::uniform_int_distribution<int> cell(0, M - 1);
        auto counts = sample_until_max(M, r, [&] { return cell(rng); });
        int total = 0, mx = 0;
        for (int c : counts) total += c, mx = std::max(mx, c);
        REQUIRE(mx == r);
        REQUIRE(total <= M * (r - 1) + 1);
      }
  // M=3, r=5 never needs more than 13 draws
  std::mt19937_64 g(2);
  std::uniform_int_distribution<int> c3(0, 2);
  for (int rep = 0; rep < 1000; ++rep) {
    auto counts = sample_until_max(3, 5, [&] { return c3(g); });
    REQUIRE(counts[0] + counts[1] + counts[2] <= 13);
  }
}

TEST_CASE("select_cells") {
  const std::vector<int> c{5, 4, 1};
  CHECK(select_cells(c, 5, 0) == IndexList{0});
  CHECK(select_cells(c, 5, 1) == IndexList{0, 1});
  CHECK(select_cells(c, 5, 5) == IndexList{0, 1, 2});
  CHECK(select_cells(c, 5, 1, ThresholdMode::strict) == IndexList{0});
  CHECK(select_cells(c, 5, 2, ThresholdMode::strict) == IndexList{0, 1});
  // strict mode with threshold above every cell still keeps the argmax
  CHECK(select_cells(std::vector<int>{2, 1}, 2, 0, ThresholdMode::strict) == IndexList{0});
  CHECK_THROWS(select_cells(c, 6, 1));
}

TEST_CASE("select_cells always contains the argmax") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    const int M = 2 + rep % 5, r = 1 + rep % 9;
    std::uniform_int_distribution<int> cell(0, M - 1);
    auto counts = sample_until_max(M, r, [&] { return cell(rng); });
    const int arg = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    for (int D = 0; D <= r; ++D)
      for (auto mode : {ThresholdMode::inclusive, ThresholdMode::strict}) {
        auto s = select_cells(counts, r, D, mode);
        REQUIRE(std::find(s.begin(), s.end(), arg) != s.end());
      }
  }
}

TEST_CASE("winning cell is uniform under a fair sampler") {
  const int M = 4, runs = 10000;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> cell(0, M - 1);
  std::vector<int> wins(M);
  for (int rep = 0; rep < runs; ++rep) {
    auto counts = sample_until_max(M, 5, [&] { return cell(rng); });
    ++wins[std::max_element(counts.begin(), counts.end()) - counts.begin()];
  }
  double chi2 = 0.0;
  for (int w : wins) chi2 += (w - runs / 4.0) * (w - runs / 4.0) / (runs / 4.0);
  CHECK(chi2 < 16.266);  // chi-square(3) upper 0.001 point
}

TEST_CASE("exact_pcs examples") {
  for (int r = 1; r <= 6; ++r) CHECK(exact_pcs(1, r, 0) == doctest::Approx(1.0));
  CHECK(exact_pcs(2, 1, 0) == doctest::Approx(0.5));
  for (int M = 1; M <= 4; ++M)
    for (int r = 1; r <= 6; ++r) CHECK(exact_pcs(M, r, r) == doctest::Approx(1.0));
  // M=2, r=2: cell 0 reaches 2 w.p. 1/2; otherwise it finishes at 0 (1/4) or 1 (1/4)
  CHECK(exact_pcs(2, 2, 1) == doctest::Approx(0.75));
  CHECK_THROWS_AS(exact_pcs(8, 12, 0, 1000), std::length_error);
}

TEST_CASE("exact_pcs is monotone in D") {
  for (int M = 2; M <= 4; ++M)
    for (int r = 2; r <= 10; ++r)
      for (int D = 1; D <= r; ++D) REQUIRE(exact_pcs(M, r, D) >= exact_pcs(M, r, D - 1) - 1e-12);
}

TEST_CASE("find_min_D examples") {
  for (int r : {1, 5, 50}) CHECK(find_min_D(1, r, 0.95, 1000, 1) == 0);
  CHECK(find_min_D(2, 1, 0.95, 10000, 1) == 1);
  CHECK(std::abs(find_min_D(2, 3, 0.5, 100000, 1) - exact_min_D(2, 3, 0.5)) <= 1);
  CHECK_THROWS(find_min_D(2, 3, 0.0, 100, 1));
}

TEST_CASE("find_min_D is monotone in P*") {
  for (int M : {2, 3, 5, 9})
    for (int r : {5, 20}) {
      int prev = 0;
      for (double p : {0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0}) {
        const int D = find_min_D(M, r, p, 2000, 7);
        CHECK(D >= prev);
        CHECK(D <= r);
        prev = D;
      }
    }
}

TEST_CASE("find_min_D is memoized by key") {
  clear_d_cache();
  const int a = find_min_D(3, 8, 0.9, 3000, 11);
  CHECK(find_min_D(3, 8, 0.9, 3000, 11) == a);
  auto snap = d_cache_snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].key == DCacheKey{3, 8, 0.9, 3000, 11});
  CHECK(snap[0].D == a);
  find_min_D(3, 8, 0.9, 3000, 12);
  CHECK(d_cache_snapshot().size() == 2);
}

TEST_CASE("rule config validation") {
  CHECK_NOTHROW((RuleRConfig{5, 2, 3}.validate()));
  CHECK_THROWS((RuleRConfig{5, 6, 3}.validate()));
  CHECK_THROWS((RuleRConfig{0, 0, 3}.validate()));
  CHECK_THROWS((RuleRConfig{5, 0, 0}.validate()));
}

}  // TEST_SUITE
