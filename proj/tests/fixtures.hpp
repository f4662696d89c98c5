#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "ofd/discovery.hpp"
#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"
#include "ofd/repair.hpp"
#include "ofd/sense_assignment.hpp"

namespace fixtures {

inline std::string data(const std::string& name) { return std::string(OFD_DATA_DIR) + "/" + name; }

// Table 1 without the id column.
inline ofd::Relation table1() {
  auto r = ofd::load_csv(data("table1.csv"));
  std::vector<ofd::AttrId> keep;
  for (ofd::AttrId a = 1; a < r.arity(); ++a) keep.push_back(a);
  return r.project(keep);
}

inline ofd::Relation table1_prefix(std::size_t n) {
  std::vector<ofd::TupleId> ids;
  for (ofd::TupleId t = 0; t < n; ++t) ids.push_back(t);
  return table1().subset(ids);
}

inline ofd::Relation table4() {
  auto r = ofd::load_csv(data("table4.csv"));
  std::vector<ofd::AttrId> keep;
  for (ofd::AttrId a = 1; a < r.arity(); ++a) keep.push_back(a);
  return r.project(keep);
}

inline ofd::Ontology clinical() { return ofd::load_ontology(data("clinical.json")); }

// Three tuples agreeing on X whose Y values pairwise share a class but never
// all three at once.
inline std::pair<ofd::Relation, ofd::Ontology> pairwise_only() {
  ofd::Relation r({"X", "Y"}, {{"x", "v"}, {"x", "w"}, {"x", "z"}});
  ofd::Ontology o;
  auto s = o.add_sense("s");
  o.add_class("C", std::nullopt, {s}, {"v", "z"});
  o.add_class("D", std::nullopt, {s}, {"v", "w"});
  o.add_class("F", std::nullopt, {s}, {"w", "z"});
  return {r, o};
}

// A -> B and B -> C hold as synonym OFDs while A -> C does not.
inline std::pair<ofd::Relation, ofd::Ontology> no_transitivity() {
  ofd::Relation r({"A", "B", "C"}, {{"a", "b", "d"}, {"a", "c", "e"}, {"a", "b", "d"}});
  ofd::Ontology o;
  auto s = o.add_sense("s");
  o.add_class("BC", std::nullopt, {s}, {"b", "c"});
  o.add_class("D", std::nullopt, {s}, {"d"});
  o.add_class("E", std::nullopt, {s}, {"e"});
  return {r, o};
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Small forest over the value pool a..h with two senses.
inline ofd::Ontology random_ontology(std::mt19937_64& rng) {
  static const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h"};
  ofd::Ontology o;
  std::vector<ofd::SenseId> senses = {o.add_sense("s0"), o.add_sense("s1")};
  std::size_t classes = pick(rng, 2, 6);
  for (std::size_t c = 0; c < classes; ++c) {
    std::optional<ofd::ClassId> parent;
    if (c > 0 && pick(rng, 0, 2) > 0) parent = static_cast<ofd::ClassId>(pick(rng, 0, c - 1));
    auto id = o.add_class("k" + std::to_string(c), parent, senses, {pool[pick(rng, 0, pool.size() - 1)]});
    std::size_t extra = pick(rng, 0, 3);
    for (std::size_t i = 0; i < extra; ++i) {
      const auto& v = pool[pick(rng, 0, pool.size() - 1)];
      auto s = senses[pick(rng, 0, 1)];
      if (!o.member(id, v, s)) o.add_member(id, v, s);
    }
  }
  return o;
}

// Columns draw from small domains over a..h plus one value no ontology knows.
inline ofd::Relation random_relation(std::mt19937_64& rng, std::size_t n, std::size_t arity) {
  static const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h", "zz"};
  std::vector<std::string> schema;
  std::vector<std::size_t> dom;
  for (std::size_t a = 0; a < arity; ++a) {
    schema.push_back("A" + std::to_string(a));
    dom.push_back(pick(rng, 1, 4));
  }
  std::vector<std::vector<std::string>> rows(n);
  for (auto& row : rows)
    for (std::size_t a = 0; a < arity; ++a) {
      std::size_t base = (a * 3) % pool.size();
      row.push_back(pool[(base + pick(rng, 0, dom[a] - 1)) % pool.size()]);
    }
  return ofd::Relation(schema, rows);
}

inline auto ofd_key(const ofd::Ofd& phi) {
  return std::make_tuple(phi.lhs, phi.rhs, static_cast<int>(phi.kind), phi.theta);
}

inline std::vector<std::tuple<ofd::AttrSet, ofd::AttrSet, int, std::uint32_t>> canonical(const ofd::OfdSet& s) {
  std::vector<std::tuple<ofd::AttrSet, ofd::AttrSet, int, std::uint32_t>> out;
  for (const auto& phi : s) out.push_back(ofd_key(phi));
  std::sort(out.begin(), out.end());
  return out;
}

inline ofd::OfdSet parse_sigma(const std::vector<std::string>& lines, const std::vector<std::string>& schema) {
  ofd::OfdSet out;
  for (const auto& l : lines) out.push_back(ofd::parse_ofd(l, schema));
  return out;
}

// Micro repair instance: one syn OFD K -> V over a pool of a few
// candidate-producing values, used for exhaustive cross-checks.
struct Micro {
  ofd::Relation r;
  ofd::Ontology o;
  ofd::OfdSet sigma;
  ofd::SenseAssignment lambda;
};

inline Micro random_micro(std::mt19937_64& rng, std::size_t max_tuples = 8) {
  static const std::vector<std::string> known = {"p", "q", "r", "s"};
  static const std::vector<std::string> unknown = {"u1", "u2", "u3"};
  Micro m;
  auto s = m.o.add_sense("s0");
  auto s1 = m.o.add_sense("s1");
  m.o.add_class("P", std::nullopt, {s}, {"p", "q"});
  m.o.add_class("R", std::nullopt, {s}, {"r"});
  m.o.add_class("S", std::nullopt, {s1}, {"s", "p"});
  std::size_t n = pick(rng, 3, max_tuples);
  std::size_t keys = pick(rng, 1, 3);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < n; ++t) {
    std::string v = pick(rng, 0, 2) == 0 ? unknown[pick(rng, 0, unknown.size() - 1)]
                                         : known[pick(rng, 0, known.size() - 1)];
    rows.push_back({"k" + std::to_string(pick(rng, 0, keys - 1)), v});
  }
  m.r = ofd::Relation({"K", "V"}, rows);
  m.sigma = parse_sigma({"K -> V syn"}, m.r.schema());
  m.lambda = ofd::sense_assignment(m.r, m.sigma, m.o);
  return m;
}

}  // namespace fixtures
