#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ofd/discovery.hpp"
#include "ofd/inference.hpp"
#include "ofd/oracle.hpp"

using namespace ofd;

namespace {

const std::vector<std::string> kSchema = {"CC", "CTRY", "SYMP", "TEST", "DIAG", "MED"};

AttrSet attrs(std::initializer_list<const char*> names) {
  AttrSet s = 0;
  for (const auto* n : names)
    for (AttrId a = 0; a < kSchema.size(); ++a)
      if (kSchema[a] == n) s |= attr_bit(a);
  return s;
}

OfdSet random_sigma(std::mt19937_64& rng, std::size_t arity, std::size_t count) {
  OfdSet out;
  for (std::size_t i = 0; i < count; ++i) {
    Ofd phi;
    phi.lhs = fixtures::pick(rng, 0, (std::size_t{1} << arity) - 1);
    phi.rhs = attr_bit(fixtures::pick(rng, 0, arity - 1));
    out.push_back(phi);
  }
  return out;
}

// Whether a set of OFDs satisfies the three minimality conditions.
bool is_minimal(const OfdSet& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (attr_count(m[i].rhs) != 1) return false;
    for (auto b : attr_members(m[i].lhs)) {
      auto x = m[i].lhs & ~attr_bit(b);
      if ((closure(x, m) & m[i].rhs) == m[i].rhs) return false;
    }
    OfdSet rest = m;
    rest.erase(rest.begin() + static_cast<long>(i));
    if (implies(rest, m[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("closure basics") {
  CHECK(closure(attrs({"CC"}), {}) == attrs({"CC"}));
  auto sigma = fixtures::parse_sigma({"CC -> CTRY", "CC,DIAG -> MED"}, kSchema);
  auto c = closure(attrs({"CC", "DIAG"}), sigma);
  CHECK((c & attrs({"CC", "DIAG", "CTRY", "MED"})) == attrs({"CC", "DIAG", "CTRY", "MED"}));
  CHECK(c == attrs({"CC", "DIAG", "CTRY", "MED"}));
}

TEST_CASE("closure is not transitive") {
  auto sigma = fixtures::parse_sigma({"CC -> CTRY", "CTRY -> MED"}, kSchema);
  CHECK(closure(attrs({"CC"}), sigma) == attrs({"CC", "CTRY"}));
  // so the closure is not idempotent either
  CHECK(closure(attrs({"CC", "CTRY"}), sigma) == attrs({"CC", "CTRY", "MED"}));
}

TEST_CASE("implies") {
  auto sigma = fixtures::parse_sigma({"CC -> CTRY", "CC,DIAG -> MED"}, kSchema);
  CHECK(implies(sigma, parse_ofd("CC -> CC", kSchema)));
  CHECK(implies(sigma, parse_ofd("CC,DIAG -> MED,CTRY", kSchema)));
  CHECK_FALSE(implies(sigma, parse_ofd("DIAG -> MED", kSchema)));
  auto ab = fixtures::parse_sigma({"CC -> CTRY", "CTRY -> MED"}, kSchema);
  CHECK_FALSE(implies(ab, parse_ofd("CC -> MED", kSchema)));
  auto mixed = fixtures::parse_sigma({"CC -> CTRY syn", "CTRY -> MED fd"}, kSchema);
  CHECK_THROWS_AS(closure(attrs({"CC"}), mixed), std::invalid_argument);
}

TEST_CASE("transitivity counterexample is semantic as well") {
  auto [r, o] = fixtures::no_transitivity();
  std::vector<EqClass> by_a = strip(partition_single(r, 0)).classes;
  std::vector<EqClass> by_b = strip(partition_single(r, 1)).classes;
  CHECK(check_synonym(r, o, by_a, 1));
  CHECK(check_synonym(r, o, by_b, 2));
  CHECK_FALSE(check_synonym(r, o, by_a, 2));
  auto sigma = fixtures::parse_sigma({"A -> B", "B -> C"}, r.schema());
  CHECK_FALSE(implies(sigma, parse_ofd("A -> C", r.schema())));
}

TEST_CASE("minimal cover drops the composed dependency") {
  auto sigma = fixtures::parse_sigma({"CC -> CTRY", "CC,DIAG -> MED", "CC,DIAG -> MED,CTRY"}, kSchema);
  auto m = minimal_cover(sigma);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == parse_ofd("CC -> CTRY", kSchema));
  CHECK(m[1] == parse_ofd("CC,DIAG -> MED", kSchema));
  auto single = fixtures::parse_sigma({"CC -> CTRY"}, kSchema);
  CHECK(minimal_cover(single) == single);
}

TEST_CASE("closure matches axiom saturation on random sets") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t n = fixtures::pick(rng, 2, 6);
    auto sigma = random_sigma(rng, n, fixtures::pick(rng, 0, 8));
    for (AttrSet x = 0; x < (AttrSet{1} << n); ++x) {
      auto c = closure(x, sigma);
      REQUIRE(c == oracle::saturate_closure(x, sigma, n));
      CHECK((closure(c, sigma) & c) == c);
      for (auto a = 0U; a < n; ++a) CHECK((closure(x | attr_bit(a), sigma) & c) == c);
    }
  }
}

TEST_CASE("minimal cover is equivalent and minimal on random sets") {
  std::mt19937_64 rng(12);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = fixtures::pick(rng, 2, 6);
    auto sigma = random_sigma(rng, n, fixtures::pick(rng, 0, 8));
    for (auto& phi : sigma)
      if (fixtures::pick(rng, 0, 3) == 0) phi.rhs |= attr_bit(fixtures::pick(rng, 0, n - 1));
    auto m = minimal_cover(sigma);
    for (AttrSet x = 0; x < (AttrSet{1} << n); ++x) REQUIRE(closure(x, m) == closure(x, sigma));
    CHECK(is_minimal(m));
  }
}

TEST_CASE("derived OFDs hold on instances satisfying sigma") {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int iter = 0; iter < 150; ++iter) {
    auto o = fixtures::random_ontology(rng);
    auto r = fixtures::random_relation(rng, fixtures::pick(rng, 2, 30), fixtures::pick(rng, 2, 5));
    OfdSet sigma;
    for (AttrSet x = 0; x < (AttrSet{1} << r.arity()); ++x)
      for (AttrId a = 0; a < r.arity(); ++a)
        if (!has_attr(x, a) && fixtures::pick(rng, 0, 4) == 0 &&
            oracle::holds(r, o, x, a, OfdKind::Synonym, 0, 1.0)) {
          Ofd phi;
          phi.lhs = x;
          phi.rhs = attr_bit(a);
          sigma.push_back(phi);
        }
    for (AttrSet x = 0; x < (AttrSet{1} << r.arity()); ++x) {
      auto c = closure(x, sigma);
      for (auto a : attr_members(c & ~x)) {
        CHECK(oracle::holds(r, o, x, a, OfdKind::Synonym, 0, 1.0));
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("ofd text format") {
  auto phi = parse_ofd("SYMP, DIAG -> MED inh:2 support=0.9", kSchema);
  CHECK(phi.lhs == attrs({"SYMP", "DIAG"}));
  CHECK(phi.rhs == attrs({"MED"}));
  CHECK(phi.kind == OfdKind::Inheritance);
  CHECK(phi.theta == 2);
  CHECK(phi.support == doctest::Approx(0.9));
  CHECK(parse_ofd("CC -> CTRY", kSchema).kind == OfdKind::Synonym);
  CHECK(parse_ofd("CC -> CTRY fd", kSchema).kind == OfdKind::Traditional);
  CHECK(parse_ofd(" -> CTRY", kSchema).lhs == 0);
  CHECK_THROWS_AS(parse_ofd("CC CTRY", kSchema), InputError);
  CHECK_THROWS_AS(parse_ofd("CC -> NOPE", kSchema), InputError);
  CHECK_THROWS_AS(parse_ofd("CC -> CTRY support=1.5", kSchema), InputError);

  OfdSet sigma = {phi, parse_ofd("CC -> CTRY", kSchema), parse_ofd("CC -> CTRY", kSchema)};
  CHECK(dedupe(sigma).size() == 2);
  std::ostringstream out;
  write_ofds(out, dedupe(sigma), kSchema);
  std::istringstream in(out.str());
  auto back = read_ofds(in, kSchema);
  CHECK(back == dedupe(sigma));
  CHECK(decompose({parse_ofd("CC -> CTRY,MED", kSchema)}).size() == 2);
}
