#include "doctest.h"
#include "fixtures.hpp"
#include "ofd/oracle.hpp"

using namespace ofd;

TEST_CASE("exact vertex cover") {
  CHECK(oracle::exact_min_vertex_cover(3, {{0, 1}, {1, 2}, {0, 2}}).size() == 2);
  CHECK(oracle::exact_min_vertex_cover(5, {}).empty());
  CHECK(oracle::exact_min_vertex_cover(4, {{0, 1}, {0, 2}, {0, 3}}) == std::vector<TupleId>{0});
  CHECK(oracle::exact_min_vertex_cover(4, {{0, 1}, {2, 3}}) == std::vector<TupleId>{0, 2});
  oracle::Budget tight;
  tight.max_nodes = 3;
  CHECK_THROWS_AS(oracle::exact_min_vertex_cover(4, {{0, 1}}, tight), oracle::BudgetExceeded);
}

TEST_CASE("transportation distance") {
  CHECK(oracle::emd_lp({1, 0}, {0, 1}) == doctest::Approx(1.0));
  CHECK(oracle::emd_lp({1, 0, 0}, {0, 0, 1}) == doctest::Approx(2.0));
  CHECK(oracle::emd_lp({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
  CHECK(oracle::emd_lp({2, 0}, {0, 1}) == doctest::Approx(1.0));
  oracle::Budget tight;
  tight.max_bins = 2;
  CHECK_THROWS_AS(oracle::emd_lp({1, 0, 0}, {0, 0, 1}, tight), oracle::BudgetExceeded);
}

TEST_CASE("exhaustive best per size") {
  // cost is 5 minus the sum of the chosen ids, infeasible if it contains 1
  auto best = oracle::exhaustive_best_per_k(3, [](const std::vector<std::size_t>& ids) -> std::optional<std::size_t> {
    std::size_t sum = 0;
    for (auto i : ids) {
      if (i == 1) return std::nullopt;
      sum += i;
    }
    return 5 - sum;
  });
  REQUIRE(best.size() == 4);
  CHECK(best[0] == std::optional<std::size_t>(5));
  CHECK(best[1] == std::optional<std::size_t>(3));
  CHECK(best[2] == std::optional<std::size_t>(3));
  CHECK_FALSE(best[3].has_value());
}

TEST_CASE("pareto by pairwise comparison") {
  using P = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(oracle::pareto_quadratic(P{{2, 2}, {2, 3}, {1, 5}}) == P{{1, 5}, {2, 2}});
  CHECK(oracle::pareto_quadratic(P{}).empty());
}

TEST_CASE("exhaustive repair on a consistent instance") {
  auto r = fixtures::table4();
  auto o = fixtures::clinical();
  auto sigma = fixtures::parse_sigma({"CC -> CTRY syn"}, r.schema());
  Relation clean({"CC", "CTRY", "SYMP", "DIAG", "MED"}, {{"US", "USA", "a", "b", "c"}, {"US", "America", "a", "b", "d"}});
  auto lambda = sense_assignment(clean, sigma, o);
  CHECK(oracle::consistent(clean, sigma, o, lambda));
  CHECK(oracle::min_data_repair(clean, sigma, o, lambda) == std::optional<std::size_t>(0));
  auto pts = oracle::exhaustive_repair(clean, sigma, o, lambda, {});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].dist_s == 0);
  CHECK(pts[0].dist_i == 0);
}

TEST_CASE("minimal data repair on the clinical rows") {
  auto r = fixtures::table4();
  auto o = fixtures::clinical();
  auto sigma = fixtures::parse_sigma({"CC -> CTRY syn"}, r.schema());
  auto lambda = sense_assignment(r, sigma, o);
  CHECK_FALSE(oracle::consistent(r, sigma, o, lambda));
  CHECK(oracle::min_data_repair(r, sigma, o, lambda) == std::optional<std::size_t>(1));
  oracle::Budget tight;
  tight.max_tuples = 2;
  CHECK_THROWS_AS(oracle::min_data_repair(r, sigma, o, lambda, tight), oracle::BudgetExceeded);
}
