#include "ofd/repair.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace ofd {

void validate_repair_sigma(const OfdSet& sigma) {
  AttrSet lhs = 0, rhs = 0;
  for (const auto& phi : sigma) {
    if (phi.kind == OfdKind::Inheritance) throw InputError("repair supports syn and fd OFDs only");
    if (attr_count(phi.rhs) != 1) throw InputError("repair needs single-attribute consequents");
    lhs |= phi.lhs;
    rhs |= phi.rhs;
  }
  if (lhs & rhs) throw InputError("an attribute is the antecedent of one OFD and the consequent of another");
}

namespace {

SenseId effective_sense(const OfdSet& sigma, const SenseAssignment& lambda, std::size_t i, std::size_t cls) {
  return sigma[i].kind == OfdKind::Traditional ? kLiteralSense : lambda.per_ofd[i].classes[cls].sense;
}

// Classes of ontology concepts shared by every value under s.
std::vector<ClassId> common_classes(const Ontology& o, const std::vector<std::string>& values, SenseId s) {
  if (s == kLiteralSense || values.empty()) return {};
  auto acc = o.classes_of(values[0], s);
  std::sort(acc.begin(), acc.end());
  for (std::size_t i = 1; i < values.size() && !acc.empty(); ++i) {
    auto c = o.classes_of(values[i], s);
    std::sort(c.begin(), c.end());
    std::vector<ClassId> next;
    std::set_intersection(acc.begin(), acc.end(), c.begin(), c.end(), std::back_inserter(next));
    acc.swap(next);
  }
  return acc;
}

std::vector<std::string> distinct_values(const Relation& r, const std::vector<TupleId>& tuples, AttrId a) {
  std::set<std::string> s;
  for (auto t : tuples) s.insert(r.value(t, a));
  return {s.begin(), s.end()};
}

}  // namespace

bool class_consistent(const Ontology& o, const std::vector<std::string>& values, SenseId s) {
  std::set<std::string> d(values.begin(), values.end());
  if (d.size() <= 1) return true;
  return !common_classes(o, {d.begin(), d.end()}, s).empty();
}

bool satisfies(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda) {
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto& os = lambda.per_ofd.at(i);
    for (std::size_t c = 0; c < os.classes.size(); ++c) {
      const auto& cs = os.classes[c];
      if (cs.tuples.size() < 2) continue;
      if (!class_consistent(o, distinct_values(r, cs.tuples, os.consequent), effective_sense(sigma, lambda, i, c)))
        return false;
    }
  }
  return true;
}

std::vector<Insertion> collect_candidates(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                          const SenseAssignment& lambda) {
  std::set<Insertion> pool;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i].kind == OfdKind::Traditional) continue;
    const auto& os = lambda.per_ofd.at(i);
    for (const auto& cs : os.classes) {
      if (cs.tuples.size() < 2 || cs.sense == kLiteralSense) continue;
      auto values = distinct_values(r, cs.tuples, os.consequent);
      if (class_consistent(o, values, cs.sense)) continue;
      std::map<std::string, std::size_t> freq;
      for (auto t : cs.tuples) ++freq[r.value(t, os.consequent)];
      // Target concept: the class holding the most frequent covered value.
      std::optional<ClassId> target;
      std::size_t best = 0;
      for (const auto& [v, f] : freq) {
        auto cls = o.classes_of(v, cs.sense);
        if (cls.empty()) continue;
        ClassId c = *std::min_element(cls.begin(), cls.end());
        if (!target || f > best) {
          best = f;
          target = c;
        }
      }
      if (!target) continue;
      for (const auto& [v, f] : freq)
        if (!o.contains(v, cs.sense)) pool.insert({v, cs.sense, *target});
    }
  }
  return {pool.begin(), pool.end()};
}

std::vector<std::pair<TupleId, TupleId>> ConflictGraph::pairs() const {
  std::vector<std::pair<TupleId, TupleId>> out;
  for (const auto& e : edges) out.emplace_back(e.u, e.v);
  return out;
}

ConflictGraph build_conflict_graph(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                   const SenseAssignment& lambda) {
  ConflictGraph g;
  g.n = r.size();
  std::unordered_map<std::uint64_t, std::vector<EdgeLabel>> edges;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto& os = lambda.per_ofd.at(i);
    for (std::size_t c = 0; c < os.classes.size(); ++c) {
      const auto& cs = os.classes[c];
      if (cs.tuples.size() < 2) continue;
      SenseId s = effective_sense(sigma, lambda, i, c);
      std::map<std::string, std::vector<TupleId>> groups;
      for (auto t : cs.tuples) groups[r.value(t, os.consequent)].push_back(t);
      if (groups.size() < 2) continue;
      std::vector<std::pair<const std::string*, std::vector<ClassId>>> keyed;
      for (const auto& [v, _] : groups) {
        auto cl = s == kLiteralSense ? std::vector<ClassId>{} : o.classes_of(v, s);
        std::sort(cl.begin(), cl.end());
        keyed.emplace_back(&v, std::move(cl));
      }
      for (std::size_t x = 0; x < keyed.size(); ++x)
        for (std::size_t y = x + 1; y < keyed.size(); ++y) {
          std::vector<ClassId> both;
          std::set_intersection(keyed[x].second.begin(), keyed[x].second.end(), keyed[y].second.begin(),
                                keyed[y].second.end(), std::back_inserter(both));
          if (!both.empty()) continue;
          for (auto t1 : groups[*keyed[x].first])
            for (auto t2 : groups[*keyed[y].first]) {
              auto u = std::min(t1, t2), v = std::max(t1, t2);
              auto& labels = edges[(std::uint64_t{u} << 32) | v];
              EdgeLabel l{i, s};
              if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
            }
        }
    }
  }
  for (auto& [key, labels] : edges) {
    std::sort(labels.begin(), labels.end());
    g.edges.push_back({static_cast<TupleId>(key >> 32), static_cast<TupleId>(key & 0xffffffffU), std::move(labels)});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const ConflictEdge& a, const ConflictEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  return g;
}

std::vector<TupleId> approx_vertex_cover(std::size_t n, const std::vector<std::pair<TupleId, TupleId>>& raw) {
  std::vector<std::pair<TupleId, TupleId>> edges;
  for (auto [u, v] : raw)
    if (u != v) edges.emplace_back(std::min(u, v), std::max(u, v));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<char> in(n, 0);
  for (auto [u, v] : edges)
    if (!in[u] && !in[v]) in[u] = in[v] = 1;
  std::vector<std::vector<TupleId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (TupleId v = 0; v < n; ++v) {
    if (!in[v]) continue;
    bool redundant = true;
    for (auto w : adj[v]) redundant = redundant && in[w];
    if (redundant) in[v] = 0;
  }
  std::vector<TupleId> cover;
  for (TupleId v = 0; v < n; ++v)
    if (in[v]) cover.push_back(v);
  return cover;
}

std::vector<TupleId> approx_vertex_cover(const ConflictGraph& g) { return approx_vertex_cover(g.n, g.pairs()); }

std::size_t delta_p(const OfdSet& sigma, std::size_t cover_size) {
  AttrSet z = 0;
  for (const auto& phi : sigma) z |= phi.rhs;
  return std::min<std::size_t>(attr_count(z), sigma.size()) * cover_size;
}

namespace {

std::size_t round_limit(const Relation& r) { return 2 * r.size() + 4; }

// Values acceptable for tuple t under OFD i, judged against the reference
// tuples of its class. nullopt means unconstrained.
std::optional<std::set<std::string>> acceptable(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                                const SenseAssignment& lambda, std::size_t i, TupleId t,
                                                const std::vector<char>& in_cover) {
  const auto& os = lambda.per_ofd[i];
  std::size_t c = os.class_of[t];
  const auto& cs = os.classes[c];
  std::vector<TupleId> refs;
  for (auto u : cs.tuples)
    if (u != t && !in_cover[u]) refs.push_back(u);
  if (refs.empty())
    for (auto u : cs.tuples)
      if (u != t) refs.push_back(u);
  if (refs.empty()) return std::nullopt;
  auto values = distinct_values(r, refs, os.consequent);
  SenseId s = effective_sense(sigma, lambda, i, c);
  std::set<std::string> out;
  if (values.size() == 1) out.insert(values[0]);
  for (auto cl : common_classes(o, values, s))
    for (const auto& v : o.synonyms(cl, s)) out.insert(v);
  return out;
}

std::string choose_value(const Relation& r, const Ontology& o, const std::vector<TupleId>& cls, AttrId a,
                         SenseId s, const std::set<std::string>& ok, const std::vector<TupleId>& refs) {
  std::map<std::string, std::size_t> freq;
  for (auto t : cls) ++freq[r.value(t, a)];
  for (const auto& [v, f] : freq)
    if (2 * f > cls.size() && ok.count(v)) return v;
  auto ref_values = distinct_values(r, refs, a);
  for (auto cl : common_classes(o, ref_values, s)) {
    const auto& canon = o.canonical(cl, s);
    if (ok.count(canon)) return canon;
  }
  std::optional<std::string> best;
  std::size_t best_f = 0;
  for (const auto& [v, f] : freq)
    if (ok.count(v) && (!best || f > best_f)) {
      best = v;
      best_f = f;
    }
  if (best) return *best;
  return *ok.begin();
}

void repair_round_cover(Relation& cur, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                        const ConflictGraph& g) {
  auto cover = approx_vertex_cover(g);
  std::vector<char> in_cover(cur.size(), 0);
  for (auto t : cover) in_cover[t] = 1;
  std::vector<std::set<AttrId>> conflicted(cur.size());
  for (const auto& e : g.edges)
    for (const auto& l : e.labels) {
      conflicted[e.u].insert(lambda.per_ofd[l.ofd].consequent);
      conflicted[e.v].insert(lambda.per_ofd[l.ofd].consequent);
    }
  for (auto t : cover) {
    for (auto a : conflicted[t]) {
      std::optional<std::set<std::string>> ok;
      std::optional<std::size_t> primary;
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (lambda.per_ofd[i].consequent != a) continue;
        if (!primary) primary = i;
        auto acc = acceptable(cur, sigma, o, lambda, i, t, in_cover);
        if (!acc) continue;
        if (!ok) {
          ok = std::move(acc);
        } else {
          std::set<std::string> both;
          std::set_intersection(ok->begin(), ok->end(), acc->begin(), acc->end(), std::inserter(both, both.end()));
          ok = std::move(both);
        }
      }
      if (!ok || ok->count(cur.value(t, a))) continue;
      const auto& os = lambda.per_ofd[*primary];
      const auto& cs = os.classes[os.class_of[t]];
      SenseId s = effective_sense(sigma, lambda, *primary, os.class_of[t]);
      std::vector<TupleId> refs;
      for (auto u : cs.tuples)
        if (u != t && !in_cover[u]) refs.push_back(u);
      if (refs.empty())
        for (auto u : cs.tuples)
          if (u != t) refs.push_back(u);
      std::string value;
      if (!ok->empty()) {
        value = choose_value(cur, o, cs.tuples, a, s, *ok, refs);
      } else {
        // No value satisfies every OFD sharing the consequent: fall back to the class's canonical value.
        auto ref_values = distinct_values(cur, refs, a);
        auto common = common_classes(o, ref_values, s);
        if (!common.empty()) {
          value = o.canonical(common.front(), s);
        } else {
          std::map<std::string, std::size_t> freq;
          for (auto u : refs) ++freq[cur.value(u, a)];
          value = std::max_element(freq.begin(), freq.end(),
                                   [](const auto& x, const auto& y) { return x.second < y.second; })->first;
          value = o.canonical_value(value, s);
        }
      }
      cur.set_value(t, a, value);
    }
  }
}

// Rewrites one inconsistent class to its largest agreeing group.
void fix_class_largest_group(Relation& cur, const Ontology& o, const std::vector<TupleId>& cls, AttrId a, SenseId s) {
  std::map<std::string, std::size_t> freq;
  for (auto t : cls) ++freq[cur.value(t, a)];
  // Candidate groups: each literal value, and each concept under s.
  std::map<ClassId, std::size_t> concept_cover;
  if (s != kLiteralSense)
    for (const auto& [v, f] : freq)
      for (auto c : o.classes_of(v, s)) concept_cover[c] += f;
  std::optional<ClassId> best_concept;
  std::size_t best = 0;
  for (const auto& [c, n] : concept_cover)
    if (n > best) {
      best = n;
      best_concept = c;
    }
  std::optional<std::string> best_literal;
  for (const auto& [v, f] : freq)
    if (f > best) {
      best = f;
      best_literal = v;
      best_concept.reset();
    }
  std::string target;
  if (best_concept) {
    std::size_t bf = 0;
    for (const auto& [v, f] : freq)
      if (o.member(*best_concept, v, s) && f > bf) {
        bf = f;
        target = v;
      }
    for (auto t : cls)
      if (!o.member(*best_concept, cur.value(t, a), s)) cur.set_value(t, a, target);
  } else {
    target = *best_literal;
    for (auto t : cls)
      if (cur.value(t, a) != target) cur.set_value(t, a, target);
  }
}

bool largest_group_pass(Relation& cur, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda) {
  bool changed = false;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto& os = lambda.per_ofd[i];
    for (std::size_t c = 0; c < os.classes.size(); ++c) {
      const auto& cs = os.classes[c];
      if (cs.tuples.size() < 2) continue;
      SenseId s = effective_sense(sigma, lambda, i, c);
      if (class_consistent(o, distinct_values(cur, cs.tuples, os.consequent), s)) continue;
      fix_class_largest_group(cur, o, cs.tuples, os.consequent, s);
      changed = true;
    }
  }
  return changed;
}

std::vector<CellChange> diff(const Relation& before, const Relation& after, const OfdSet& sigma) {
  AttrSet z = 0;
  for (const auto& phi : sigma) z |= phi.rhs;
  std::vector<CellChange> out;
  for (TupleId t = 0; t < before.size(); ++t)
    for (auto a : attr_members(z))
      if (before.value(t, a) != after.value(t, a)) out.push_back({t, a, before.value(t, a), after.value(t, a)});
  return out;
}

Relation run_cover(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda) {
  Relation cur = r;
  for (std::size_t round = 0; round < round_limit(r); ++round) {
    auto g = build_conflict_graph(cur, sigma, o, lambda);
    if (g.edges.empty()) break;
    repair_round_cover(cur, sigma, o, lambda, g);
  }
  // Pairwise agreement does not imply a shared concept for the whole class.
  for (std::size_t round = 0; round < round_limit(r) && !satisfies(cur, sigma, o, lambda); ++round)
    if (!largest_group_pass(cur, sigma, o, lambda)) break;
  return cur;
}

Relation run_largest_group(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda) {
  Relation cur = r;
  for (std::size_t round = 0; round < round_limit(r); ++round)
    if (!largest_group_pass(cur, sigma, o, lambda)) break;
  return cur;
}

// Tuples linked through classes of OFDs sharing one consequent attribute.
// Antecedents never change during repair, so blocks can be repaired apart.
struct Block {
  AttrId attr = 0;
  std::vector<TupleId> tuples;  // sorted global ids
  Relation local;
  SenseAssignment lambda;       // over local ids
  std::set<SenseId> senses;                    // senses of its classes
  std::set<std::string> values;                // values the repair may read or write
  std::set<std::pair<SenseId, ClassId>> classes;  // concepts it may consult
};

struct BlockFix {
  bool consistent = true;
  std::vector<CellChange> changes;  // global tuple ids
};

std::vector<Block> inconsistent_blocks(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                       const SenseAssignment& lambda) {
  std::vector<Block> out;
  std::set<AttrId> attrs;
  for (const auto& os : lambda.per_ofd) attrs.insert(os.consequent);
  std::vector<std::size_t> parent(r.size());
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto a : attrs) {
    for (std::size_t t = 0; t < parent.size(); ++t) parent[t] = t;
    std::vector<char> linked(r.size(), 0), bad(r.size(), 0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const auto& os = lambda.per_ofd[i];
      if (os.consequent != a) continue;
      for (std::size_t c = 0; c < os.classes.size(); ++c) {
        const auto& cs = os.classes[c];
        if (cs.tuples.size() < 2) continue;
        for (auto t : cs.tuples) {
          linked[t] = 1;
          parent[find(t)] = find(cs.tuples.front());
        }
        if (!class_consistent(o, distinct_values(r, cs.tuples, a), effective_sense(sigma, lambda, i, c)))
          bad[cs.tuples.front()] = 1;
      }
    }
    std::map<std::size_t, std::vector<TupleId>> groups;
    std::set<std::size_t> bad_roots;
    for (TupleId t = 0; t < r.size(); ++t) {
      if (!linked[t]) continue;
      groups[find(t)].push_back(t);
      if (bad[t]) bad_roots.insert(find(t));
    }
    for (auto root : bad_roots) {
      Block b;
      b.attr = a;
      b.tuples = std::move(groups[root]);
      b.local = r.subset(b.tuples);
      auto local_of = [&](TupleId t) {
        return static_cast<TupleId>(std::lower_bound(b.tuples.begin(), b.tuples.end(), t) - b.tuples.begin());
      };
      b.lambda.per_ofd.resize(sigma.size());
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        const auto& os = lambda.per_ofd[i];
        auto& ls = b.lambda.per_ofd[i];
        ls.ofd = i;
        ls.consequent = os.consequent;
        ls.class_of.assign(b.tuples.size(), 0);
        if (os.consequent != a) continue;
        std::map<std::uint32_t, std::uint32_t> seen;
        for (std::size_t l = 0; l < b.tuples.size(); ++l) {
          auto c = os.class_of[b.tuples[l]];
          auto [it, fresh] = seen.emplace(c, static_cast<std::uint32_t>(ls.classes.size()));
          if (fresh) {
            ClassSense cs = os.classes[c];
            for (auto& t : cs.tuples) t = local_of(t);
            cs.rep = local_of(cs.rep);
            ls.classes.push_back(std::move(cs));
          }
          ls.class_of[l] = it->second;
        }
      }
      for (auto t : b.tuples) b.values.insert(r.value(t, a));
      for (std::size_t i = 0; i < sigma.size(); ++i)
        for (std::size_t c = 0; c < b.lambda.per_ofd[i].classes.size(); ++c)
          b.senses.insert(effective_sense(sigma, b.lambda, i, c));
      b.senses.erase(kLiteralSense);
      auto reach = b.values;
      for (auto s : b.senses)
        for (const auto& v : b.values)
          for (auto c : o.classes_of(v, s))
            for (const auto& w : o.synonyms(c, s)) reach.insert(w);
      for (auto s : b.senses)
        for (const auto& v : reach)
          for (auto c : o.classes_of(v, s)) b.classes.insert({s, c});
      b.values = std::move(reach);
      out.push_back(std::move(b));
    }
  }
  return out;
}

BlockFix repair_block(const Block& b, const OfdSet& sigma, const Ontology& o, RepairStrategy strategy) {
  std::optional<std::vector<CellChange>> best;
  auto consider = [&](const Relation& cand) {
    if (!satisfies(cand, sigma, o, b.lambda)) return;
    auto d = diff(b.local, cand, sigma);
    if (!best || d.size() < best->size()) best = std::move(d);
  };
  if (strategy != RepairStrategy::LargestGroup) consider(run_cover(b.local, sigma, o, b.lambda));
  if (strategy != RepairStrategy::Cover) consider(run_largest_group(b.local, sigma, o, b.lambda));
  BlockFix fix;
  if (!best) {
    fix.consistent = false;
    return fix;
  }
  for (auto& c : *best) c.tuple = b.tuples[c.tuple];
  fix.changes = std::move(*best);
  return fix;
}

bool touches(const Block& b, const std::vector<Insertion>& ins) {
  for (const auto& x : ins)
    if (b.senses.count(x.sense) && (b.values.count(x.value) || b.classes.count({x.sense, x.target}))) return true;
  return false;
}

// Joins per-block fixes into one repair of r.
DataRepair assemble(const Relation& r, const std::vector<const BlockFix*>& fixes, std::size_t tau) {
  DataRepair out;
  for (const auto* f : fixes) {
    if (!f->consistent) {
      out.repaired = r;
      out.changes.clear();
      return out;
    }
    out.changes.insert(out.changes.end(), f->changes.begin(), f->changes.end());
  }
  std::sort(out.changes.begin(), out.changes.end(),
            [](const CellChange& x, const CellChange& y) { return std::tie(x.tuple, x.attr) < std::tie(y.tuple, y.attr); });
  out.consistent = true;
  out.feasible = out.changes.size() <= tau;
  out.repaired = r;
  for (const auto& c : out.changes) out.repaired.set_value(c.tuple, c.attr, c.new_value);
  return out;
}

}  // namespace

DataRepair repair_data(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                       std::size_t tau, RepairStrategy strategy) {
  std::vector<BlockFix> fixes;
  for (const auto& b : inconsistent_blocks(r, sigma, o, lambda)) fixes.push_back(repair_block(b, sigma, o, strategy));
  std::vector<const BlockFix*> ptrs;
  for (const auto& f : fixes) ptrs.push_back(&f);
  auto out = assemble(r, ptrs, tau);
  out.cover = approx_vertex_cover(build_conflict_graph(r, sigma, o, lambda));
  out.delta_p = delta_p(sigma, out.cover.size());
  return out;
}

std::size_t repair_cost(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                        const std::vector<Insertion>& pool, const std::vector<std::size_t>& ids,
                        RepairStrategy strategy) {
  Ontology s2 = o;
  for (auto i : ids) s2.add_value(pool[i].value, pool[i].sense, pool[i].target);
  auto d = repair_data(r, sigma, s2, lambda, kNoLimit, strategy);
  return d.consistent ? d.dist() : kNoLimit;
}

std::vector<RepairPair> SearchResult::pairs() const {
  std::vector<RepairPair> out;
  for (const auto& p : best_per_k)
    if (p) out.push_back(*p);
  return out;
}

namespace {

struct Node {
  std::vector<std::size_t> ids;  // sorted
  bool consistent = false;
  std::vector<CellChange> changes;
  OntologyDelta delta;
};

// Evaluates ontology repairs against the blocks of the unrepaired ontology.
// Insertions only add memberships, so consistent blocks stay consistent and
// a block the insertions cannot reach keeps its root fix.
class Evaluator {
 public:
  Evaluator(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
            const std::vector<Insertion>& pool, RepairStrategy strategy)
      : r_(r), sigma_(sigma), o_(o), lambda_(lambda), pool_(pool), strategy_(strategy),
        blocks_(inconsistent_blocks(r, sigma, o, lambda)) {
    for (const auto& b : blocks_) root_.push_back(repair_block(b, sigma, o, strategy));
  }

  Node operator()(std::vector<std::size_t> ids) const {
    Node n;
    n.ids = std::move(ids);
    Ontology s2 = o_;
    std::vector<Insertion> ins;
    for (auto i : n.ids) {
      n.delta.merge(s2.add_value(pool_[i].value, pool_[i].sense, pool_[i].target));
      ins.push_back(pool_[i]);
    }
    n.consistent = true;
    for (std::size_t b = 0; b < blocks_.size() && n.consistent; ++b) {
      BlockFix fresh;
      const BlockFix* fix = &root_[b];
      if (!n.ids.empty() && touches(blocks_[b], ins)) {
        fresh = repair_block(blocks_[b], sigma_, s2, strategy_);
        fix = &fresh;
      }
      n.consistent = fix->consistent;
      n.changes.insert(n.changes.end(), fix->changes.begin(), fix->changes.end());
    }
    if (!n.consistent) n.changes.clear();
    std::sort(n.changes.begin(), n.changes.end(), [](const CellChange& x, const CellChange& y) {
      return std::tie(x.tuple, x.attr) < std::tie(y.tuple, y.attr);
    });
    return n;
  }

  RepairPair to_pair(const Node& n) const {
    RepairPair p;
    p.candidate_ids = n.ids;
    p.ontology = n.delta;
    p.data = n.changes;
    p.dist_s = n.delta.dist();
    p.dist_i = n.changes.size();
    Ontology s2 = o_;
    s2.apply(n.delta.insertions);
    p.delta_p = delta_p(sigma_, approx_vertex_cover(build_conflict_graph(r_, sigma_, s2, lambda_)).size());
    return p;
  }

 private:
  const Relation& r_;
  const OfdSet& sigma_;
  const Ontology& o_;
  const SenseAssignment& lambda_;
  const std::vector<Insertion>& pool_;
  RepairStrategy strategy_;
  std::vector<Block> blocks_;
  std::vector<BlockFix> root_;
};

std::size_t node_delta(const Node& n) { return n.consistent ? n.changes.size() : kNoLimit; }

}  // namespace

SearchResult ontology_repair_search(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                    const SenseAssignment& lambda, const BeamConfig& cfg) {
  validate_repair_sigma(sigma);
  SearchResult res;
  res.pool = collect_candidates(r, sigma, o, lambda);
  const std::size_t w = res.pool.size();
  res.beam = cfg.beam ? std::max<std::size_t>(1, *cfg.beam)
                      : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(w / std::numbers::e)));
  const std::size_t k_max = std::min(cfg.k_max.value_or(w), w);
  Evaluator evaluate(r, sigma, o, lambda, res.pool, cfg.strategy);

  auto record = [&](std::size_t k, const Node& best) {
    if (res.best_per_k.size() <= k) res.best_per_k.resize(k + 1);
    auto d = node_delta(best);
    if (d <= cfg.tau) res.best_per_k[k] = evaluate.to_pair(best);
    res.levels.push_back({k, 0, d, best.ids});
  };

  Node root = evaluate({});
  record(0, root);
  res.levels.back().evaluated = 1;
  if (node_delta(root) == 0 || (cfg.stop_at_first_feasible && res.best_per_k[0])) return res;

  std::vector<std::vector<std::size_t>> frontier{{}};
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::set<std::vector<std::size_t>> children;
    for (const auto& parent : frontier)
      for (std::size_t c = 0; c < w; ++c) {
        if (std::binary_search(parent.begin(), parent.end(), c)) continue;
        auto child = parent;
        child.insert(std::upper_bound(child.begin(), child.end(), c), c);
        children.insert(std::move(child));
      }
    if (children.empty()) break;
    std::vector<std::vector<std::size_t>> todo(children.begin(), children.end());
    std::vector<Node> nodes(todo.size());
    unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(todo.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) nodes[i] = evaluate(todo[i]);
    };
    if (threads == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      auto da = node_delta(nodes[a]), db = node_delta(nodes[b]);
      if (da != db) return da < db;
      return nodes[a].ids < nodes[b].ids;
    });
    record(k, nodes[order[0]]);
    res.levels.back().evaluated = nodes.size();
    frontier.clear();
    for (std::size_t i = 0; i < order.size() && i < res.beam; ++i) frontier.push_back(nodes[order[i]].ids);
    if (node_delta(nodes[order[0]]) == 0) break;
    if (cfg.stop_at_first_feasible && res.best_per_k[k]) break;
  }
  return res;
}

std::vector<std::pair<std::size_t, std::size_t>> pareto_front(const std::vector<std::pair<std::size_t, std::size_t>>& pts) {
  std::vector<std::pair<std::size_t, std::size_t>> sorted(pts);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::size_t, std::size_t>> out;
  // Sweep by dist_s; a point survives when its dist_i beats every point with
  // smaller dist_s, or it ties the best point of its own dist_s.
  std::size_t best_before = kNoLimit;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    std::size_t local_min = sorted[i].second;
    if (local_min < best_before)
      for (std::size_t k = i; k < j && sorted[k].second == local_min; ++k) out.push_back(sorted[k]);
    best_before = std::min(best_before, local_min);
    i = j;
  }
  return out;
}

std::vector<RepairPair> pareto_front(const std::vector<RepairPair>& pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> pts;
  for (const auto& p : pairs) pts.emplace_back(p.dist_s, p.dist_i);
  auto front = pareto_front(pts);
  std::vector<RepairPair> out;
  std::vector<char> used(pairs.size(), 0);
  for (const auto& pt : front)
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (!used[i] && pairs[i].dist_s == pt.first && pairs[i].dist_i == pt.second) {
        used[i] = 1;
        out.push_back(pairs[i]);
        break;
      }
  return out;
}

bool verify_pair(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                 const RepairPair& pair, std::size_t tau) {
  Ontology s2 = o;
  s2.apply(pair.ontology.insertions);
  std::vector<CellUpdate> updates;
  for (const auto& c : pair.data) {
    if (r.value(c.tuple, c.attr) != c.old_value) return false;
    updates.push_back({c.tuple, c.attr, c.new_value});
  }
  auto applied = apply_cell_updates(r, updates);
  if (applied.dist != pair.dist_i) return false;
  if (pair.dist_i > tau || pair.dist_i > pair.delta_p) return false;
  return satisfies(applied.relation, sigma, s2, lambda);
}

std::string repairs_to_json(const SearchResult& result, const std::vector<RepairPair>& front, const Relation& r,
                            const Ontology& o) {
  using nlohmann::json;
  auto pair_json = [&](const RepairPair& p) {
    json j;
    j["dist_s"] = p.dist_s;
    j["dist_i"] = p.dist_i;
    j["delta_p"] = p.delta_p;
    j["insertions"] = json::array();
    for (const auto& ins : p.ontology.insertions)
      j["insertions"].push_back(
          {{"value", ins.value}, {"sense", o.sense_name(ins.sense)}, {"class", o.concept_class(ins.target).name}});
    j["updates"] = json::array();
    for (const auto& c : p.data)
      j["updates"].push_back({{"tuple", c.tuple}, {"attr", r.schema()[c.attr]}, {"old", c.old_value}, {"new", c.new_value}});
    return j;
  };
  json out;
  out["beam"] = result.beam;
  out["candidates"] = json::array();
  for (const auto& c : result.pool)
    out["candidates"].push_back(
        {{"value", c.value}, {"sense", o.sense_name(c.sense)}, {"class", o.concept_class(c.target).name}});
  out["levels"] = json::array();
  for (const auto& l : result.levels) {
    json jl{{"k", l.k}, {"evaluated", l.evaluated}};
    jl["best_dist_i"] = l.best_delta == kNoLimit ? json(nullptr) : json(l.best_delta);
    out["levels"].push_back(jl);
  }
  out["pareto"] = json::array();
  for (const auto& p : front) out["pareto"].push_back(pair_json(p));
  return out.dump(2) + "\n";
}

}  // namespace ofd
