#include "ofd/discovery.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <unordered_set>

namespace ofd {

namespace {

std::uint64_t make_key(SenseId s, ClassId c) { return (std::uint64_t{s} << 32) | c; }

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i, w);
    });
  for (auto& t : pool) t.join();
}

std::size_t needed_coverage(double kappa, std::size_t n) {
  if (kappa >= 1.0) return n;
  return static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(n) - 1e-9));
}

}  // namespace

ValueIndex::ValueIndex(const Relation& r, const Ontology& o, bool with_ancestors, std::uint32_t theta) {
  keys_.resize(r.arity());
  reach_.resize(r.arity());
  std::size_t known = 0, total_senses = 0;
  std::unordered_map<std::string, std::size_t> seen;
  for (AttrId a = 0; a < r.arity(); ++a) {
    const auto& dict = r.dictionary(a);
    keys_[a].resize(dict.size());
    if (with_ancestors) reach_[a].resize(dict.size());
    for (std::uint32_t c = 0; c < dict.size(); ++c) {
      const auto& ms = o.memberships(dict[c]);
      auto& k = keys_[a][c];
      for (const auto& m : ms) k.push_back(make_key(m.sense, m.cls));
      std::sort(k.begin(), k.end());
      if (with_ancestors) {
        auto& up = reach_[a][c];
        for (const auto& m : ms) {
          std::optional<ClassId> cur = m.cls;
          for (std::uint32_t d = 0; cur && d <= theta; ++d, cur = o.parent(*cur))
            up.push_back(make_key(m.sense, *cur));
        }
        std::sort(up.begin(), up.end());
        up.erase(std::unique(up.begin(), up.end()), up.end());
      }
      if (!ms.empty() && seen.emplace(dict[c], 0).second) {
        auto senses = o.senses_of(dict[c]);
        ++known;
        total_senses += senses.size();
        max_senses_ = std::max(max_senses_, senses.size());
      }
    }
  }
  mean_senses_ = known ? static_cast<double>(total_senses) / static_cast<double>(known) : 0.0;
}

Verifier::Verifier(const Relation& r, const ValueIndex& index, std::size_t n)
    : r_(r), index_(index), n_(n) {}

std::size_t Verifier::coverage(OfdKind kind, const EqClass& cls, AttrId a, bool exact, bool opt4) {
  const auto& codes = r_.codes(a);
  std::size_t dict = r_.dictionary(a).size();
  if (count_.size() < dict) {
    count_.assign(dict, 0);
    stamp_.assign(dict, 0);
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  distinct_.clear();
  std::size_t top_literal = 0;
  for (auto t : cls) {
    auto c = codes[t];
    if (stamp_[c] != epoch_) {
      stamp_[c] = epoch_;
      count_[c] = 0;
      distinct_.push_back(c);
    }
    top_literal = std::max<std::size_t>(top_literal, ++count_[c]);
  }
  if (distinct_.size() == 1) {
    if (!opt4 && kind != OfdKind::Traditional) ++lookups_;
    return cls.size();
  }
  if (kind == OfdKind::Traditional) return top_literal;
  lookups_ += distinct_.size();
  auto keys_of = [&](std::uint32_t c) -> const std::vector<std::uint64_t>& {
    return kind == OfdKind::Inheritance ? index_.reach(a, c) : index_.keys(a, c);
  };
  if (exact) {
    scratch_ = keys_of(distinct_[0]);
    std::vector<std::uint64_t> next;
    for (std::size_t i = 1; i < distinct_.size() && !scratch_.empty(); ++i) {
      const auto& k = keys_of(distinct_[i]);
      next.clear();
      std::set_intersection(scratch_.begin(), scratch_.end(), k.begin(), k.end(), std::back_inserter(next));
      scratch_.swap(next);
    }
    return scratch_.empty() ? top_literal : cls.size();
  }
  tally_.clear();
  std::size_t best = top_literal;
  for (auto c : distinct_)
    for (auto k : keys_of(c)) best = std::max(best, tally_[k] += count_[c]);
  return best;
}

bool Verifier::check(OfdKind kind, const std::vector<EqClass>& classes, AttrId a, double kappa,
                     bool opt4, bool count_singletons) {
  bool exact = kappa >= 1.0;
  std::size_t needed = needed_coverage(kappa, n_);
  std::size_t in_classes = 0;
  for (const auto& c : classes) in_classes += c.size();
  std::size_t covered = n_ - in_classes;
  if (count_singletons && !opt4 && kind != OfdKind::Traditional) {
    // Without Opt-3 the full partition is scanned and singleton classes are
    // checked like any other; without Opt-4 each costs a lookup.
    std::vector<char> inside(n_, 0);
    for (const auto& c : classes)
      for (auto t : c) inside[t] = 1;
    EqClass single(1);
    for (TupleId t = 0; t < n_; ++t)
      if (!inside[t]) {
        single[0] = t;
        coverage(kind, single, a, exact, opt4);
      }
  }
  std::size_t remaining = in_classes;
  for (const auto& c : classes) {
    std::size_t cov = coverage(kind, c, a, exact, opt4);
    if (exact && cov < c.size()) return false;
    covered += cov;
    remaining -= c.size();
    if (covered + remaining < needed) return false;
  }
  return covered >= needed;
}

bool check_synonym(const Relation& r, const Ontology& o, const std::vector<EqClass>& classes,
                   AttrId a, double kappa) {
  ValueIndex idx(r, o, false, 0);
  Verifier v(r, idx, r.size());
  return v.check(OfdKind::Synonym, classes, a, kappa, true, false);
}

bool check_inheritance(const Relation& r, const Ontology& o, const std::vector<EqClass>& classes,
                       AttrId a, std::uint32_t theta, double kappa) {
  ValueIndex idx(r, o, true, theta);
  Verifier v(r, idx, r.size());
  return v.check(OfdKind::Inheritance, classes, a, kappa, true, false);
}

bool check_traditional(const Relation& r, const std::vector<EqClass>& classes, AttrId a, double kappa) {
  Ontology empty;
  ValueIndex idx(r, empty, false, 0);
  Verifier v(r, idx, r.size());
  return v.check(OfdKind::Traditional, classes, a, kappa, true, false);
}

LatticeLevel calculate_next_level(const LatticeLevel& level, unsigned threads) {
  LatticeLevel next{level.level + 1, {}};
  std::unordered_set<AttrSet> present;
  for (const auto& n : level.nodes) present.insert(n.attrs);
  std::map<AttrSet, std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < level.nodes.size(); ++i) {
    AttrSet x = level.nodes[i].attrs;
    AttrSet top = x ? attr_bit(63 - static_cast<AttrId>(std::countl_zero(x))) : 0;
    blocks[x & ~top].push_back(i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> joins;
  for (const auto& [prefix, members] : blocks)
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        AttrSet y = level.nodes[members[i]].attrs | level.nodes[members[j]].attrs;
        bool ok = true;
        for (auto b : attr_members(y)) ok = ok && present.count(y & ~attr_bit(b));
        if (ok) joins.emplace_back(members[i], members[j]);
      }
  next.nodes.resize(joins.size());
  parallel_for(joins.size(), threads, [&](std::size_t k, unsigned) {
    const auto& a = level.nodes[joins[k].first];
    const auto& b = level.nodes[joins[k].second];
    next.nodes[k].attrs = a.attrs | b.attrs;
    next.nodes[k].partition = partition_product(a.partition, b.partition);
  });
  std::sort(next.nodes.begin(), next.nodes.end(),
            [](const LatticeNode& x, const LatticeNode& y) { return x.attrs < y.attrs; });
  return next;
}

std::vector<OfdKind> requested_kinds(const DiscoveryConfig& cfg) {
  std::vector<OfdKind> out;
  if (cfg.traditional) out.push_back(OfdKind::Traditional);
  if (cfg.synonym) out.push_back(OfdKind::Synonym);
  if (cfg.inheritance) out.push_back(OfdKind::Inheritance);
  return out;
}

namespace {

struct NodeOutcome {
  std::array<AttrSet, 3> cplus{};
  std::vector<Ofd> found;
  std::uint64_t generated = 0, verified = 0, pruned2 = 0, pruned3 = 0, keys = 0;
};

}  // namespace

DiscoveryResult fastofd(const Relation& r, const Ontology& o, const DiscoveryConfig& cfg) {
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0)) throw std::invalid_argument("kappa must be in (0,1]");
  auto t0 = std::chrono::steady_clock::now();
  DiscoveryResult res;
  auto kinds = requested_kinds(cfg);
  const std::size_t arity = r.arity();
  const AttrSet all = arity == 64 ? ~AttrSet{0} : attr_bit(arity) - 1;
  const std::size_t max_level = cfg.max_level ? std::min(cfg.max_level, arity) : arity;
  const unsigned threads = std::max(1u, cfg.threads);

  ValueIndex index(r, o, cfg.inheritance, cfg.theta);
  res.stats.max_senses_per_value = index.max_senses();
  res.stats.mean_senses_per_value = index.mean_senses();
  std::vector<Verifier> verifiers;
  for (unsigned w = 0; w < threads; ++w) verifiers.emplace_back(r, index, r.size());

  std::unordered_map<AttrSet, bool> superkey;
  LatticeLevel prev{0, {}};
  prev.nodes.push_back({0, stripped_of(r, 0), {}});
  prev.nodes[0].cplus.fill(all);
  superkey[0] = prev.nodes[0].partition.superkey();

  LatticeLevel cur{1, {}};
  for (AttrId a = 0; a < arity && max_level >= 1; ++a)
    cur.nodes.push_back({attr_bit(a), stripped_single(r, a), {}});

  // lhs sets emitted so far, per (kind, consequent), for the Opt-2-off minimality filter
  std::map<std::pair<int, AttrId>, std::vector<AttrSet>> emitted;

  auto is_key = [&](AttrSet z) {
    if (!superkey.at(z)) return false;
    for (auto b : attr_members(z))
      if (superkey.at(z & ~attr_bit(b))) return false;
    return true;
  };

  while (!cur.nodes.empty()) {
    auto tl = std::chrono::steady_clock::now();
    for (const auto& n : cur.nodes) superkey[n.attrs] = n.partition.superkey();
    std::unordered_map<AttrSet, std::size_t> prev_at;
    for (std::size_t i = 0; i < prev.nodes.size(); ++i) prev_at[prev.nodes[i].attrs] = i;

    std::vector<NodeOutcome> out(cur.nodes.size());
    parallel_for(cur.nodes.size(), threads, [&](std::size_t i, unsigned w) {
      auto& node = cur.nodes[i];
      auto& res_i = out[i];
      res_i.cplus.fill(all);
      for (auto b : attr_members(node.attrs)) {
        auto it = prev_at.find(node.attrs & ~attr_bit(b));
        const auto& sub = it == prev_at.end() ? std::array<AttrSet, 3>{} : prev.nodes[it->second].cplus;
        for (int k = 0; k < 3; ++k) res_i.cplus[k] &= sub[k];
      }
      auto& verifier = verifiers[w];
      for (auto a : attr_members(node.attrs)) {
        AttrSet z = node.attrs & ~attr_bit(a);
        const auto& zpart = prev.nodes[prev_at.at(z)].partition;
        std::array<bool, 3> held{};
        bool stronger_held = false;
        for (auto kind : kinds) {
          int k = static_cast<int>(kind);
          ++res_i.generated;
          if (cfg.opt2 && !has_attr(res_i.cplus[k], a)) {
            ++res_i.pruned2;
            continue;
          }
          bool holds;
          if (stronger_held) {
            holds = true;
            ++res_i.verified;
          } else if (cfg.opt3 && zpart.superkey()) {
            if (!is_key(z)) {
              ++res_i.pruned3;
              continue;
            }
            holds = true;
            ++res_i.verified;
            ++res_i.keys;
          } else {
            ++res_i.verified;
            holds = verifier.check(kind, zpart.classes, a, cfg.kappa, cfg.opt4, !cfg.opt3);
          }
          if (holds) {
            held[k] = true;
            stronger_held = true;
            Ofd phi;
            phi.lhs = z;
            phi.rhs = attr_bit(a);
            phi.kind = kind;
            phi.theta = kind == OfdKind::Inheritance ? cfg.theta : 0;
            phi.support = cfg.kappa;
            res_i.found.push_back(phi);
          }
        }
        for (int k = 0; k < 3; ++k)
          if (held[k]) res_i.cplus[k] &= ~attr_bit(a);
      }
    });

    LevelStats ls;
    ls.level = cur.level;
    ls.nodes = cur.nodes.size();
    std::vector<LatticeNode> kept;
    for (std::size_t i = 0; i < cur.nodes.size(); ++i) {
      auto& oc = out[i];
      ls.generated += oc.generated;
      ls.verified += oc.verified;
      res.stats.pruned_opt2 += oc.pruned2;
      res.stats.pruned_opt3 += oc.pruned3;
      res.stats.key_shortcuts += oc.keys;
      for (const auto& phi : oc.found) {
        auto& lhs_list = emitted[{static_cast<int>(phi.kind), attr_members(phi.rhs)[0]}];
        bool minimal = true;
        if (!cfg.opt2)
          for (auto w : lhs_list) minimal = minimal && !((w & ~phi.lhs) == 0 && w != phi.lhs);
        if (!minimal) continue;
        lhs_list.push_back(phi.lhs);
        res.ofds.push_back(phi);
        ++ls.ofds;
      }
      cur.nodes[i].cplus = oc.cplus;
      bool empty = true;
      for (auto kind : kinds) empty = empty && oc.cplus[static_cast<int>(kind)] == 0;
      if (!(cfg.opt2 && empty)) kept.push_back(std::move(cur.nodes[i]));
    }
    res.stats.generated += ls.generated;
    res.stats.verified += ls.verified;
    cur.nodes = std::move(kept);

    LatticeLevel next{cur.level + 1, {}};
    if (cur.level < max_level) next = calculate_next_level(cur, threads);
    ls.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tl).count();
    res.stats.levels.push_back(ls);
    prev = std::move(cur);
    cur = std::move(next);
  }
  for (const auto& v : verifiers) res.stats.lookups += v.lookups();
  res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace ofd
