#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mps/resampling.hpp"

using namespace mps;

TEST_SUITE("resampling") {

TEST_CASE("subsample size") {
  CHECK(subsample_size(10000, 0.5) == 100);
  CHECK(subsample_size(442, 0.5) == 21);
  CHECK(subsample_size(10, 1.0) == 10);
  CHECK(subsample_size(1, 0.5) == 1);
}

TEST_CASE("full subsample is every index") {
  Engine rng = make_stream(1, "t");
  auto s = draw_subsample(25, 25, rng);
  for (int i = 0; i < 25; ++i) CHECK(s[i] == i);
  CHECK_THROWS(draw_subsample(5, 6, rng));
  CHECK_THROWS(draw_subsample(5, 0, rng));
}

TEST_CASE("subsample indices are distinct, sorted and in range") {
  Engine rng = make_stream(2, "t");
  for (int rep = 0; rep < 200; ++rep) {
    auto s = draw_subsample(97, 13, rng);
    REQUIRE(s.size() == 13);
    CHECK(std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end());
    CHECK(s.front() >= 0);
    CHECK(s.back() < 97);
  }
}

TEST_CASE("uniform inclusion") {
  Engine rng = make_stream(3, "t");
  std::vector<int> hits(10);
  for (int rep = 0; rep < 100000; ++rep)
    for (int i : draw_subsample(10, 3, rng)) ++hits[i];
  for (int h : hits) CHECK(std::abs(h - 30000) <= 600);
}

TEST_CASE("bootstrap") {
  Engine rng = make_stream(4, "t");
  CHECK(draw_bootstrap(1, rng) == IndexList{0});
  double distinct = 0.0;
  for (int rep = 0; rep < 10000; ++rep) {
    auto b = draw_bootstrap(1000, rng);
    REQUIRE(b.size() == 1000);
    distinct += static_cast<double>(std::set<int>(b.begin(), b.end()).size()) / 1000.0;
  }
  CHECK(std::abs(distinct / 10000 - 0.632) < 0.01);
}

TEST_CASE("streams are keyed, not ordered") {
  const int path[] = {3, 1};
  auto a = make_stream(7, "mps", path, 2);
  auto b = make_stream(7, "mps", path, 2);
  CHECK(draw_subsample(100, 10, a) == draw_subsample(100, 10, b));
  auto c = make_stream(7, "mps", path, 3);
  auto d = make_stream(7, "fss", path, 2);
  auto e = make_stream(8, "mps", path, 2);
  const int other[] = {1, 3};
  auto f = make_stream(7, "mps", other, 2);
  auto ref = make_stream(7, "mps", path, 2)();
  CHECK(c() != ref);
  CHECK(d() != ref);
  CHECK(e() != ref);
  CHECK(f() != ref);
  CHECK(derive_seed(7, "x") == derive_seed(7, "x"));
  CHECK(derive_seed(7, "x") != derive_seed(7, "y"));
}

TEST_CASE("resample plans") {
  ResamplePlan sub;
  CHECK(sub.size(100) == 10);
  ResamplePlan half{ResamplePlan::Scheme::half_sample};
  CHECK(half.size(101) == 50);
  ResamplePlan boot{ResamplePlan::Scheme::bootstrap};
  CHECK(boot.size(37) == 37);
  CHECK(parse_scheme("bootstrap") == ResamplePlan::Scheme::bootstrap);
  CHECK_THROWS(parse_scheme("jackknife"));
}

TEST_CASE("diagnostic at small scale") {
  const int ns[] = {100, 400};
  ResamplePlan sub;
  sub.seed = 5;
  auto one = selection_proportion_diagnostic(ns, 50, 60, sub, 1);
  auto three = selection_proportion_diagnostic(ns, 50, 60, sub, 3);
  REQUIRE(one.rows.size() == 120);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].proportion == three.rows[i].proportion);
    CHECK(one.rows[i].proportion >= 0.0);
    CHECK(one.rows[i].proportion <= 1.0);
  }
  // symmetric about one half: mean within 3 standard errors
  for (const auto& s : one.summary) CHECK(std::abs(s.mean - 0.5) <= 3 * s.sd / std::sqrt(60.0));

  std::ostringstream csv;
  write_diagnostic_csv(csv, one.rows);
  CHECK(csv.str().rfind("scheme,n,rep,proportion\n", 0) == 0);
}

}  // TEST_SUITE
