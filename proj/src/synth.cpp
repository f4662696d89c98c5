#include "ofd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "json.hpp"

namespace ofd {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string name(const char* prefix, std::size_t a, std::size_t b) {
  return prefix + std::to_string(a) + "_" + std::to_string(b);
}

}  // namespace

Synthetic make_synthetic(const SyntheticSpec& spec) {
  if (spec.arity < 1 || spec.arity > kMaxArity) throw InputError("synthetic arity out of range");
  if (spec.senses == 0 || spec.concepts == 0 || spec.synonyms == 0 || spec.class_size == 0)
    throw InputError("synthetic sizes must be positive");
  std::mt19937_64 rng(spec.seed);
  Synthetic out;
  auto& o = out.ontology;
  std::vector<SenseId> senses;
  for (std::size_t s = 0; s < spec.senses; ++s) senses.push_back(o.add_sense("s" + std::to_string(s)));
  ClassId root = o.add_class("root", std::nullopt, senses, {"thing"});
  // names[c][s]: values of concept c under sense s
  std::vector<std::vector<std::vector<std::string>>> names(spec.concepts,
                                                           std::vector<std::vector<std::string>>(spec.senses));
  for (std::size_t c = 0; c < spec.concepts; ++c) {
    auto base = "v" + std::to_string(c);
    o.add_class("c" + std::to_string(c), root, senses, {base});
    for (std::size_t s = 0; s < spec.senses; ++s) names[c][s].push_back(base);
  }
  for (std::size_t c = 0; c < spec.concepts; ++c)
    for (std::size_t s = 0; s < spec.senses; ++s)
      for (std::size_t m = 0; m < spec.synonyms; ++m) {
        auto v = "v" + std::to_string(c) + "_" + std::to_string(s) + "_" + std::to_string(m);
        o.add_member(static_cast<ClassId>(c + 1), v, senses[s]);
        names[c][s].push_back(v);
        if (m == 0 && spec.senses > 1 && spec.concepts > 1) {
          // the same name means a different concept under the next sense
          std::size_t c2 = (c + 1) % spec.concepts, s2 = (s + 1) % spec.senses;
          o.add_member(static_cast<ClassId>(c2 + 1), v, senses[s2]);
          names[c2][s2].push_back(v);
        }
      }

  const std::size_t pairs = std::min(spec.pairs, spec.arity / 2);
  std::vector<std::string> schema;
  for (std::size_t i = 0; i < pairs; ++i) {
    schema.push_back("K" + std::to_string(i));
    schema.push_back("V" + std::to_string(i));
  }
  for (std::size_t j = 2 * pairs; j < spec.arity; ++j) schema.push_back("N" + std::to_string(j));

  const std::size_t groups = std::max<std::size_t>(1, spec.tuples / spec.class_size);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> plan(pairs);
  for (auto& p : plan)
    for (std::size_t g = 0; g < groups; ++g) p.emplace_back(pick(rng, spec.concepts), pick(rng, spec.senses));

  std::vector<std::vector<std::string>> rows(spec.tuples);
  for (auto& row : rows) {
    for (std::size_t i = 0; i < pairs; ++i) {
      std::size_t g = pick(rng, groups);
      auto [c, s] = plan[i][g];
      const auto& pool = names[c][s];
      row.push_back(name("k", i, g));
      row.push_back(pool[pick(rng, pool.size())]);
    }
    for (std::size_t j = 2 * pairs; j < spec.arity; ++j) {
      std::size_t dom = spec.noise_domain ? spec.noise_domain : 4 + 3 * j;
      row.push_back(name("n", j, pick(rng, dom)));
    }
  }
  out.relation = Relation(schema, rows);
  for (std::size_t i = 0; i < pairs; ++i) {
    Ofd phi;
    phi.lhs = attr_bit(2 * i);
    phi.rhs = attr_bit(2 * i + 1);
    out.sigma.push_back(phi);
  }
  return out;
}

Ontology without_members(const Ontology& o, const std::vector<WithheldValue>& drop) {
  using nlohmann::json;
  std::set<std::tuple<ClassId, std::string, SenseId>> gone;
  for (const auto& w : drop) gone.insert({w.cls, w.value, w.sense});
  json doc = json::parse(ontology_to_json(o));
  for (ClassId c = 0; c < o.class_count(); ++c) {
    json syn = json::array();
    for (const auto& v : o.concept_class(c).synonyms) {
      json senses = json::array();
      for (SenseId s = 0; s < o.sense_count(); ++s)
        if (o.member(c, v, s) && !gone.count({c, v, s})) senses.push_back(o.sense(s).name);
      if (!senses.empty()) syn.push_back({{"value", v}, {"senses", senses}});
    }
    doc["classes"][c]["synonyms"] = syn;
  }
  return parse_ontology(doc.dump());
}

Injection inject_errors(const Relation& r, const Ontology& o, AttrSet attrs, const InjectionSpec& spec) {
  if (spec.err < 0 || spec.err > 1 || spec.inc < 0 || spec.inc > 1 || spec.out_of_domain < 0 ||
      spec.out_of_domain > 1)
    throw InputError("error rates must be within [0, 1]");
  std::mt19937_64 rng(spec.seed);
  Injection inj;
  inj.dirty = r;

  std::vector<std::pair<TupleId, AttrId>> cells;
  for (TupleId t = 0; t < r.size(); ++t)
    for (auto a : attr_members(attrs))
      if (a < r.arity()) cells.emplace_back(t, a);
  auto count = static_cast<std::size_t>(std::llround(spec.err * static_cast<double>(cells.size())));
  if (count > cells.size()) throw InputError("more errors requested than cells available");
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(count);
  std::sort(cells.begin(), cells.end());
  std::bernoulli_distribution fresh(spec.out_of_domain);
  std::size_t serial = 0;
  for (auto [t, a] : cells) {
    InjectedError e{t, a, r.value(t, a), {}, fresh(rng)};
    const auto& dom = r.dictionary(a);
    if (!e.out_of_domain && dom.size() > 1) {
      std::size_t i = pick(rng, dom.size() - 1);
      auto code = r.code(t, a);
      e.dirty = dom[i >= code ? i + 1 : i];
    } else {
      e.out_of_domain = true;
      e.dirty = "err" + std::to_string(serial++);
      while (r.code_of(a, e.dirty)) e.dirty = "err" + std::to_string(serial++);
    }
    inj.dirty.set_value(t, a, e.dirty);
    inj.errors.push_back(std::move(e));
  }

  auto values = o.values();
  auto withhold = static_cast<std::size_t>(std::llround(spec.inc * static_cast<double>(values.size())));
  std::shuffle(values.begin(), values.end(), rng);
  std::map<ClassId, std::size_t> remaining;
  for (ClassId c = 0; c < o.class_count(); ++c) remaining[c] = o.concept_class(c).synonyms.size();
  std::size_t taken = 0;
  for (const auto& v : values) {
    if (taken == withhold) break;
    const auto& ms = o.memberships(v);
    std::set<ClassId> cls;
    for (const auto& m : ms) cls.insert(m.cls);
    bool last = false;
    for (auto c : cls) last = last || remaining[c] <= 1;
    if (last) continue;
    for (auto c : cls) --remaining[c];
    for (const auto& m : ms) inj.withheld.push_back({v, m.sense, m.cls});
    ++taken;
  }
  inj.reduced = without_members(o, inj.withheld);
  return inj;
}

std::string injection_log_json(const Injection& inj, const Relation& r, const Ontology& o) {
  using nlohmann::json;
  json doc;
  doc["errors"] = json::array();
  for (const auto& e : inj.errors)
    doc["errors"].push_back({{"tuple", e.tuple},
                             {"attr", r.schema()[e.attr]},
                             {"clean", e.clean},
                             {"dirty", e.dirty},
                             {"mode", e.out_of_domain ? "out-of-domain" : "domain-swap"}});
  doc["withheld"] = json::array();
  for (const auto& w : inj.withheld)
    doc["withheld"].push_back(
        {{"value", w.value}, {"sense", o.sense_name(w.sense)}, {"class", o.concept_class(w.cls).name}});
  return doc.dump(2) + "\n";
}

Score score_repairs(const RepairPair& pair, const Injection& inj, const OfdSet& sigma, const Ontology& repaired,
                    const SenseAssignment& lambda) {
  Score sc;
  std::map<std::pair<TupleId, AttrId>, const InjectedError*> truth;
  for (const auto& e : inj.errors) truth[{e.tuple, e.attr}] = &e;
  sc.injected = inj.errors.size();
  sc.repaired = pair.data.size();
  for (const auto& c : pair.data) {
    auto it = truth.find({c.tuple, c.attr});
    if (it == truth.end()) continue;
    const auto& clean = it->second->clean;
    bool ok = c.new_value == clean;
    for (std::size_t i = 0; i < sigma.size() && !ok && i < lambda.per_ofd.size(); ++i) {
      if (!has_attr(sigma[i].rhs, c.attr) || sigma[i].kind == OfdKind::Traditional) continue;
      ok = repaired.synonymous(c.new_value, clean, lambda.sense_of(i, c.tuple));
    }
    if (ok) ++sc.correct;
  }
  sc.precision = sc.repaired ? static_cast<double>(sc.correct) / static_cast<double>(sc.repaired) : 1.0;
  sc.recall = sc.injected ? static_cast<double>(sc.correct) / static_cast<double>(sc.injected) : 1.0;
  std::set<std::pair<std::string, SenseId>> held;
  for (const auto& w : inj.withheld) held.insert({w.value, w.sense});
  sc.insertions = pair.ontology.insertions.size();
  for (const auto& ins : pair.ontology.insertions)
    if (held.count({ins.value, ins.sense})) ++sc.insertions_correct;
  sc.ontology_precision =
      sc.insertions ? static_cast<double>(sc.insertions_correct) / static_cast<double>(sc.insertions) : 1.0;
  sc.ontology_recall = held.empty() ? 1.0 : static_cast<double>(sc.insertions_correct) / static_cast<double>(held.size());
  return sc;
}

}  // namespace ofd
