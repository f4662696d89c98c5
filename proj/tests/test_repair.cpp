#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "ofd/oracle.hpp"
#include "ofd/repair.hpp"

using namespace ofd;

namespace {

struct Clinic {
  Relation r = fixtures::table4();
  Ontology o = fixtures::clinical();
  OfdSet sigma = load_ofds(fixtures::data("table4.ofd"), r.schema());
  SenseAssignment lambda;
  Clinic() {
    lambda = sense_assignment(r, sigma, o);
    // the coverage rule alone cannot separate FDA from MoH here
    lambda.set(1, 0, o.sense_id("FDA"));
  }
  std::size_t find(const std::vector<Insertion>& pool, const std::string& v) const {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i].value == v) return i;
    FAIL("candidate missing: " << v);
    return 0;
  }
};

using Pairs = std::vector<std::pair<TupleId, TupleId>>;

std::vector<std::pair<std::size_t, std::size_t>> points(const std::vector<RepairPair>& ps) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : ps) out.emplace_back(p.dist_s, p.dist_i);
  return out;
}

bool is_cover(const Pairs& edges, const std::vector<TupleId>& cover) {
  for (auto [u, v] : edges)
    if (std::find(cover.begin(), cover.end(), u) == cover.end() &&
        std::find(cover.begin(), cover.end(), v) == cover.end())
      return false;
  return true;
}

}  // namespace

TEST_CASE("candidate pool of the clinical instance") {
  Clinic c;
  auto pool = collect_candidates(c.r, c.sigma, c.o, c.lambda);
  CHECK(pool.size() == 3);
  auto fda = c.o.sense_id("FDA");
  auto dil = c.o.class_id("diltiazem hydrochloride");
  CHECK(pool[c.find(pool, "ASA")] == Insertion{"ASA", fda, dil});
  CHECK(pool[c.find(pool, "adizem")] == Insertion{"adizem", fda, dil});
  CHECK(pool[c.find(pool, "United States")] ==
        Insertion{"United States", c.o.sense_id("geo"), c.o.class_id("United States of America")});
}

TEST_CASE("conflict graph rows") {
  Clinic c;
  auto g = build_conflict_graph(c.r, c.sigma, c.o, c.lambda);
  CHECK(g.pairs() == Pairs{{0, 1}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  auto cover = approx_vertex_cover(g);
  CHECK(cover == std::vector<TupleId>{1, 3});
  CHECK(delta_p(c.sigma, cover.size()) == 4);

  auto s2 = c.o;
  s2.add_value("ASA", c.o.sense_id("FDA"), c.o.class_id("diltiazem hydrochloride"));
  auto g2 = build_conflict_graph(c.r, c.sigma, s2, c.lambda);
  CHECK(g2.pairs() == Pairs{{0, 3}, {1, 3}, {2, 3}});
  auto cover2 = approx_vertex_cover(g2);
  CHECK(cover2 == std::vector<TupleId>{3});
  CHECK(delta_p(c.sigma, cover2.size()) == 2);

  auto fix = repair_data(c.r, c.sigma, s2, c.lambda);
  CHECK(fix.consistent);
  CHECK(fix.dist() <= 2);
  for (const auto& ch : fix.changes) CHECK(ch.tuple == 3);
  CHECK(satisfies(fix.repaired, c.sigma, s2, c.lambda));
}

TEST_CASE("single insertions compared by their bound") {
  Clinic c;
  auto pool = collect_candidates(c.r, c.sigma, c.o, c.lambda);
  std::map<std::string, std::size_t> bound;
  for (const auto& ins : pool) {
    auto s2 = c.o;
    s2.apply({ins});
    bound[ins.value] = delta_p(c.sigma, approx_vertex_cover(build_conflict_graph(c.r, c.sigma, s2, c.lambda)).size());
  }
  CHECK(bound["ASA"] == 2);
  CHECK(bound["adizem"] == 4);
  CHECK(bound["United States"] == 4);

  BeamConfig cfg;
  cfg.beam = pool.size();
  auto res = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, cfg);
  REQUIRE(res.best_per_k.size() >= 2);
  REQUIRE(res.best_per_k[1].has_value());
  CHECK(res.best_per_k[1]->dist_i <= 2);
  CHECK(res.best_per_k[0]->dist_i == 3);
}

TEST_CASE("graph edge cases") {
  Clinic c;
  Relation clean({"CC", "CTRY", "SYMP", "DIAG", "MED"},
                 {{"US", "USA", "h", "d", "cartia"}, {"US", "America", "h", "d", "tiazac"}});
  auto lambda = sense_assignment(clean, c.sigma, c.o);
  CHECK(build_conflict_graph(clean, c.sigma, c.o, lambda).edges.empty());
  CHECK(collect_candidates(clean, c.sigma, c.o, lambda).empty());
  auto fix = repair_data(clean, c.sigma, c.o, lambda);
  CHECK(fix.consistent);
  CHECK(fix.changes.empty());
  CHECK(approx_vertex_cover(0, {}).empty());
  CHECK(delta_p(c.sigma, 0) == 0);

  auto res = ontology_repair_search(clean, c.sigma, c.o, lambda, BeamConfig{});
  REQUIRE(res.pairs().size() == 1);
  CHECK(res.pairs()[0].dist_s == 0);
  CHECK(res.pairs()[0].dist_i == 0);
}

TEST_CASE("tau bounds the data repair") {
  Clinic c;
  auto none = repair_data(c.r, c.sigma, c.o, c.lambda, 0);
  CHECK_FALSE(none.feasible);
  auto some = repair_data(c.r, c.sigma, c.o, c.lambda, 3);
  CHECK(some.feasible);
  CHECK(some.dist() <= some.delta_p);
}

TEST_CASE("strategies") {
  Clinic c;
  for (auto st : {RepairStrategy::Cover, RepairStrategy::LargestGroup, RepairStrategy::Best}) {
    auto fix = repair_data(c.r, c.sigma, c.o, c.lambda, kNoLimit, st);
    CHECK(fix.consistent);
    CHECK(satisfies(fix.repaired, c.sigma, c.o, c.lambda));
  }
  auto best = repair_data(c.r, c.sigma, c.o, c.lambda, kNoLimit, RepairStrategy::Best);
  auto cover = repair_data(c.r, c.sigma, c.o, c.lambda, kNoLimit, RepairStrategy::Cover);
  auto group = repair_data(c.r, c.sigma, c.o, c.lambda, kNoLimit, RepairStrategy::LargestGroup);
  CHECK(best.dist() <= cover.dist());
  CHECK(best.dist() <= group.dist());
}

TEST_CASE("sigma validation") {
  Relation r({"A", "B", "C"}, {{"1", "2", "3"}});
  CHECK_THROWS_AS(validate_repair_sigma(fixtures::parse_sigma({"A -> B", "B -> C"}, r.schema())), InputError);
  CHECK_THROWS_AS(validate_repair_sigma(fixtures::parse_sigma({"A -> B inh:1"}, r.schema())), InputError);
  CHECK_NOTHROW(validate_repair_sigma(fixtures::parse_sigma({"A -> C", "B -> C fd"}, r.schema())));
}

TEST_CASE("pareto front") {
  using P = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(pareto_front(P{{2, 2}, {2, 3}, {1, 5}}) == P{{1, 5}, {2, 2}});
  CHECK(pareto_front(P{{4, 4}}) == P{{4, 4}});
  CHECK(pareto_front(P{{1, 1}, {1, 1}}) == P{{1, 1}, {1, 1}});
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    P pts(fixtures::pick(rng, 0, 12));
    for (auto& p : pts) p = {fixtures::pick(rng, 0, 6), fixtures::pick(rng, 0, 6)};
    CHECK(pareto_front(pts) == oracle::pareto_quadratic(pts));
  }
  std::vector<RepairPair> pairs(3);
  pairs[0].dist_s = 2, pairs[0].dist_i = 2;
  pairs[1].dist_s = 2, pairs[1].dist_i = 3;
  pairs[2].dist_s = 1, pairs[2].dist_i = 5;
  CHECK(points(pareto_front(pairs)) == P{{1, 5}, {2, 2}});
}

TEST_CASE("vertex cover is within twice the optimum") {
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = fixtures::pick(rng, 1, 15);
    Pairs edges;
    for (TupleId u = 0; u < n; ++u)
      for (TupleId v = u + 1; v < n; ++v)
        if (fixtures::pick(rng, 0, 4) == 0) edges.emplace_back(u, v);
    auto approx = approx_vertex_cover(n, edges);
    auto exact = oracle::exact_min_vertex_cover(n, edges);
    CHECK(is_cover(edges, approx));
    CHECK(approx.size() <= 2 * exact.size());
    // no vertex of the approximate cover is redundant
    for (std::size_t i = 0; i < approx.size(); ++i) {
      auto less = approx;
      less.erase(less.begin() + static_cast<long>(i));
      CHECK_FALSE(is_cover(edges, less));
    }
  }
}

TEST_CASE("beam with full width matches exhaustive best per level") {
  std::mt19937_64 rng(43);
  int done = 0;
  for (int iter = 0; iter < 400 && done < 60; ++iter) {
    auto m = fixtures::random_micro(rng);
    auto pool = collect_candidates(m.r, m.sigma, m.o, m.lambda);
    if (pool.empty() || pool.size() > 4) continue;
    ++done;
    BeamConfig cfg;
    cfg.beam = pool.size();
    auto res = ontology_repair_search(m.r, m.sigma, m.o, m.lambda, cfg);
    auto exact = oracle::exhaustive_best_per_k(pool.size(), [&](const std::vector<std::size_t>& ids) {
      return std::optional<std::size_t>(repair_cost(m.r, m.sigma, m.o, m.lambda, pool, ids));
    });
    for (std::size_t k = 0; k < res.best_per_k.size(); ++k) {
      REQUIRE(res.best_per_k[k].has_value());
      CHECK(std::optional(res.best_per_k[k]->dist_i) == exact[k]);
    }
    for (std::size_t k = 1; k < res.best_per_k.size(); ++k)
      CHECK(res.best_per_k[k]->dist_i <= res.best_per_k[k - 1]->dist_i);
  }
  CHECK(done >= 30);
}

TEST_CASE("every emitted pair re-verifies") {
  std::mt19937_64 rng(44);
  for (int iter = 0; iter < 80; ++iter) {
    auto m = fixtures::random_micro(rng, 12);
    BeamConfig cfg;
    cfg.tau = fixtures::pick(rng, 0, 6);
    auto res = ontology_repair_search(m.r, m.sigma, m.o, m.lambda, cfg);
    for (const auto& p : res.pairs()) {
      CHECK(verify_pair(m.r, m.sigma, m.o, m.lambda, p, cfg.tau));
      CHECK(p.dist_i <= cfg.tau);
      CHECK(p.dist_i <= p.delta_p);
      CHECK(p.dist_s == p.ontology.dist());
      CHECK(p.dist_i == p.data.size());
    }
  }
}

TEST_CASE("a tampered pair fails verification") {
  Clinic c;
  auto res = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, BeamConfig{});
  auto pairs = res.pairs();
  REQUIRE_FALSE(pairs.empty());
  auto p = pairs.front();
  CHECK(verify_pair(c.r, c.sigma, c.o, c.lambda, p, kNoLimit));
  if (!p.data.empty()) {
    p.data.pop_back();
    CHECK_FALSE(verify_pair(c.r, c.sigma, c.o, c.lambda, p, kNoLimit));
  }
  if (!pairs.front().data.empty()) CHECK_FALSE(verify_pair(c.r, c.sigma, c.o, c.lambda, pairs.front(), 0));
}

TEST_CASE("search settings") {
  Clinic c;
  BeamConfig cfg;
  auto res = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, cfg);
  CHECK(res.beam == 1);  // floor(3 / e) = 1
  CHECK(res.levels.front().k == 0);
  CHECK(res.levels.front().evaluated == 1);

  cfg.k_max = 1;
  auto capped = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, cfg);
  CHECK(capped.levels.size() == 2);

  cfg.k_max.reset();
  cfg.tau = 2;
  cfg.stop_at_first_feasible = true;
  auto first = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, cfg);
  CHECK(first.levels.back().k == 1);
  for (const auto& p : first.pairs()) CHECK(p.dist_i <= 2);

  cfg = BeamConfig{};
  cfg.threads = 3;
  auto threaded = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, cfg);
  CHECK(points(threaded.pairs()) == points(res.pairs()));
}

TEST_CASE("report format") {
  Clinic c;
  auto res = ontology_repair_search(c.r, c.sigma, c.o, c.lambda, BeamConfig{});
  auto front = pareto_front(res.pairs());
  auto doc = nlohmann::json::parse(repairs_to_json(res, front, c.r, c.o));
  CHECK(doc["candidates"].size() == 3);
  REQUIRE(doc["pareto"].size() == front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    CHECK(doc["pareto"][i]["dist_s"] == front[i].dist_s);
    CHECK(doc["pareto"][i]["dist_i"] == front[i].dist_i);
    CHECK(doc["pareto"][i]["updates"].size() == front[i].data.size());
    CHECK(doc["pareto"][i]["insertions"].size() == front[i].ontology.insertions.size());
  }
}

TEST_CASE("search results equal a direct repair of the same ontology") {
  std::mt19937_64 rng(45);
  auto check = [](const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                  const BeamConfig& cfg) {
    auto res = ontology_repair_search(r, sigma, o, lambda, cfg);
    for (const auto& p : res.pairs()) {
      auto s2 = o;
      s2.apply(p.ontology.insertions);
      auto direct = repair_data(r, sigma, s2, lambda, kNoLimit, cfg.strategy);
      REQUIRE(direct.consistent);
      REQUIRE(direct.changes.size() == p.data.size());
      for (std::size_t i = 0; i < p.data.size(); ++i) {
        CHECK(direct.changes[i].tuple == p.data[i].tuple);
        CHECK(direct.changes[i].attr == p.data[i].attr);
        CHECK(direct.changes[i].new_value == p.data[i].new_value);
      }
      CHECK(direct.delta_p == p.delta_p);
    }
  };
  for (int iter = 0; iter < 60; ++iter) {
    auto m = fixtures::random_micro(rng, 16);
    BeamConfig cfg;
    cfg.strategy = static_cast<RepairStrategy>(iter % 3);
    check(m.r, m.sigma, m.o, m.lambda, cfg);
  }
  Clinic c;
  check(c.r, c.sigma, c.o, c.lambda, BeamConfig{});
  // two OFDs sharing a consequent form one block
  Relation shared({"X1", "X2", "A"}, {{"a", "p", "cartia"}, {"a", "q", "ASA"}, {"b", "q", "tiazac"},
                                      {"b", "p", "adizem"}, {"a", "p", "cartia"}});
  auto sigma = fixtures::parse_sigma({"X1 -> A syn", "X2 -> A syn"}, shared.schema());
  auto lambda = sense_assignment(shared, sigma, c.o);
  BeamConfig cfg;
  cfg.beam = 4;
  check(shared, sigma, c.o, lambda, cfg);
}
