#include "ofd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

namespace ofd::oracle {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw BudgetExceeded(what);
}

std::map<std::vector<std::string>, std::vector<TupleId>> group_by(const Relation& r, AttrSet lhs) {
  std::map<std::vector<std::string>, std::vector<TupleId>> groups;
  auto attrs = attr_members(lhs);
  for (TupleId t = 0; t < r.size(); ++t) {
    std::vector<std::string> key;
    for (auto a : attrs) key.push_back(r.value(t, a));
    groups[key].push_back(t);
  }
  return groups;
}

// (sense, class) pairs a value reaches: its own classes, plus ancestors up to
// theta edges away when theta is given.
std::set<std::pair<SenseId, ClassId>> reachable(const Ontology& o, const std::string& v,
                                                std::optional<std::uint32_t> theta) {
  std::set<std::pair<SenseId, ClassId>> out;
  for (const auto& m : o.memberships(v)) {
    out.insert({m.sense, m.cls});
    if (!theta) continue;
    auto cur = o.parent(m.cls);
    for (std::uint32_t d = 1; cur && d <= *theta; ++d, cur = o.parent(*cur)) out.insert({m.sense, *cur});
  }
  return out;
}

// Tuples of a class that can be kept while the class satisfies the kind.
std::size_t class_coverage(const Relation& r, const Ontology& o, const std::vector<TupleId>& cls, AttrId a,
                           OfdKind kind, std::uint32_t theta) {
  std::map<std::string, std::size_t> freq;
  for (auto t : cls) ++freq[r.value(t, a)];
  std::size_t best = 0;
  for (const auto& [v, f] : freq) best = std::max(best, f);
  if (kind == OfdKind::Traditional) return best;
  std::optional<std::uint32_t> th;
  if (kind == OfdKind::Inheritance) th = theta;
  std::map<std::pair<SenseId, ClassId>, std::size_t> tally;
  for (const auto& [v, f] : freq)
    for (const auto& key : reachable(o, v, th)) tally[key] += f;
  for (const auto& [k, n] : tally) best = std::max(best, n);
  return best;
}

bool class_ok(const Ontology& o, const std::set<std::string>& values, SenseId s) {
  if (values.size() <= 1) return true;
  if (s == kLiteralSense) return false;
  for (ClassId c = 0; c < o.class_count(); ++c) {
    bool all = true;
    for (const auto& v : values) all = all && o.member(c, v, s);
    if (all) return true;
  }
  return false;
}

bool consistent_on(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                   std::optional<AttrId> only) {
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    for (auto a : attr_members(sigma[i].rhs)) {
      if (only && a != *only) continue;
      for (const auto& [key, cls] : group_by(r, sigma[i].lhs)) {
        if (cls.size() < 2) continue;
        std::set<std::string> values;
        for (auto t : cls) values.insert(r.value(t, a));
        SenseId s = sigma[i].kind == OfdKind::Traditional ? kLiteralSense : lambda.sense_of(i, cls.front());
        if (!class_ok(o, values, s)) return false;
      }
    }
  }
  return true;
}

// Tries every way of rewriting `d` cells of attribute a among `cells`.
bool try_changes(Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda, AttrId a,
                 const std::vector<TupleId>& cells, const std::vector<std::string>& domain, std::size_t d,
                 std::size_t from) {
  if (d == 0) return consistent_on(r, sigma, o, lambda, a);
  for (std::size_t i = from; i + d <= cells.size(); ++i) {
    auto t = cells[i];
    std::string old = r.value(t, a);
    for (const auto& v : domain) {
      if (v == old) continue;
      r.set_value(t, a, v);
      bool ok = try_changes(r, sigma, o, lambda, a, cells, domain, d - 1, i + 1);
      r.set_value(t, a, old);
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace

bool holds(const Relation& r, const Ontology& o, AttrSet lhs, AttrId a, OfdKind kind, std::uint32_t theta,
           double kappa) {
  std::size_t covered = 0;
  for (const auto& [key, cls] : group_by(r, lhs)) {
    std::size_t c = class_coverage(r, o, cls, a, kind, theta);
    if (kappa >= 1.0 && c < cls.size()) return false;
    covered += c;
  }
  if (kappa >= 1.0) return true;
  return static_cast<double>(covered) + 1e-9 >= kappa * static_cast<double>(r.size());
}

OfdSet enumerate_ofds(const Relation& r, const Ontology& o, const DiscoveryConfig& cfg, const Budget& b) {
  require(r.size() <= b.max_tuples, "oracle: too many tuples");
  require(r.arity() <= b.max_arity, "oracle: arity too large");
  std::vector<OfdKind> kinds;
  if (cfg.traditional) kinds.push_back(OfdKind::Traditional);
  if (cfg.synonym) kinds.push_back(OfdKind::Synonym);
  if (cfg.inheritance) kinds.push_back(OfdKind::Inheritance);
  const std::size_t n = r.arity();
  const std::size_t max_level = cfg.max_level ? std::min(cfg.max_level, n) : n;
  OfdSet out;
  for (AttrId a = 0; a < n; ++a)
    for (AttrSet x = 0; x < (AttrSet{1} << n); ++x) {
      if (has_attr(x, a) || static_cast<std::size_t>(attr_count(x)) + 1 > max_level) continue;
      for (auto kind : kinds) {
        if (!holds(r, o, x, a, kind, cfg.theta, cfg.kappa)) continue;
        bool minimal = true;
        for (AttrSet w = x; minimal && w; w = (w - 1) & x)
          if (w != x && holds(r, o, w, a, kind, cfg.theta, cfg.kappa)) minimal = false;
        if (minimal && x != 0 && holds(r, o, 0, a, kind, cfg.theta, cfg.kappa)) minimal = false;
        if (!minimal) continue;
        Ofd phi;
        phi.lhs = x;
        phi.rhs = attr_bit(a);
        phi.kind = kind;
        phi.theta = kind == OfdKind::Inheritance ? cfg.theta : 0;
        phi.support = cfg.kappa;
        out.push_back(phi);
      }
    }
  return out;
}

std::vector<TupleId> exact_min_vertex_cover(std::size_t n, const std::vector<std::pair<TupleId, TupleId>>& edges,
                                            const Budget& b) {
  require(n <= b.max_nodes, "oracle: graph too large");
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<char> in(n, 0);
      for (auto v : pick) in[v] = 1;
      bool covers = true;
      for (auto [u, v] : edges) covers = covers && (u == v ? in[u] : (in[u] || in[v]));
      if (covers) return {pick.begin(), pick.end()};
      // next combination in lexicographic order
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return {};
}

double emd_lp(const std::vector<double>& p0, const std::vector<double>& q0, const Budget& b) {
  require(p0.size() == q0.size(), "oracle: histogram sizes differ");
  require(p0.size() <= b.max_bins, "oracle: too many bins");
  double sp = 0, sq = 0;
  for (auto v : p0) sp += v;
  for (auto v : q0) sq += v;
  if (sp == 0 && sq == 0) return 0;
  if (sp == 0 || sq == 0) throw std::invalid_argument("emd_lp: one side is empty");
  std::vector<double> p(p0), q(q0);
  if (std::fabs(sp - sq) > 1e-12 * std::max(sp, sq)) {
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
  }
  // Nodes: 0 source, 1..m supply bins, m+1..2m demand bins, 2m+1 sink.
  const std::size_t m = p.size(), nodes = 2 * m + 2, sink = 2 * m + 1;
  struct Arc {
    std::size_t to, rev;
    double cap, cost;
  };
  std::vector<std::vector<Arc>> g(nodes);
  auto add = [&](std::size_t u, std::size_t v, double cap, double cost) {
    g[u].push_back({v, g[v].size(), cap, cost});
    g[v].push_back({u, g[u].size() - 1, 0, -cost});
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    add(0, 1 + i, p[i], 0);
    add(1 + m + i, sink, q[i], 0);
    for (std::size_t j = 0; j < m; ++j)
      add(1 + i, 1 + m + j, inf, std::fabs(static_cast<double>(i) - static_cast<double>(j)));
  }
  const double eps = 1e-15;
  double total = 0;
  while (true) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::pair<std::size_t, std::size_t>> prev(nodes, {nodes, 0});
    dist[0] = 0;
    for (std::size_t it = 0; it < nodes; ++it) {
      bool relaxed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (dist[u] == inf) continue;
        for (std::size_t k = 0; k < g[u].size(); ++k) {
          const auto& e = g[u][k];
          if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-12) {
            dist[e.to] = dist[u] + e.cost;
            prev[e.to] = {u, k};
            relaxed = true;
          }
        }
      }
      if (!relaxed) break;
    }
    if (dist[sink] == inf) break;
    double push = inf;
    for (std::size_t v = sink; v != 0; v = prev[v].first) push = std::min(push, g[prev[v].first][prev[v].second].cap);
    if (push <= eps) break;
    for (std::size_t v = sink; v != 0; v = prev[v].first) {
      auto& e = g[prev[v].first][prev[v].second];
      e.cap -= push;
      g[e.to][e.rev].cap += push;
    }
    total += push * dist[sink];
  }
  return total;
}

std::vector<std::optional<std::size_t>> exhaustive_best_per_k(
    std::size_t w, const std::function<std::optional<std::size_t>(const std::vector<std::size_t>&)>& eval,
    const Budget& b) {
  require(w <= b.max_candidates, "oracle: candidate pool too large");
  std::vector<std::optional<std::size_t>> best(w + 1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << w); ++mask) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < w; ++i)
      if ((mask >> i) & 1U) ids.push_back(i);
    auto v = eval(ids);
    auto& slot = best[ids.size()];
    if (v && (!slot || *v < *slot)) slot = v;
  }
  return best;
}

bool consistent(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda) {
  return consistent_on(r, sigma, o, lambda, std::nullopt);
}

std::optional<std::size_t> min_data_repair(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                           const SenseAssignment& lambda, const Budget& b) {
  require(r.size() <= b.max_tuples, "oracle: too many tuples");
  AttrSet z = 0;
  for (const auto& phi : sigma) z |= phi.rhs;
  Relation work = r;
  std::size_t total = 0;
  for (auto a : attr_members(z)) {
    std::set<TupleId> touched;
    for (std::size_t i = 0; i < sigma.size(); ++i)
      if (has_attr(sigma[i].rhs, a))
        for (const auto& [key, cls] : group_by(r, sigma[i].lhs))
          if (cls.size() > 1) touched.insert(cls.begin(), cls.end());
    std::vector<TupleId> cells(touched.begin(), touched.end());
    std::set<std::string> dom;
    for (TupleId t = 0; t < r.size(); ++t) dom.insert(r.value(t, a));
    for (const auto& v : o.values()) dom.insert(v);
    std::vector<std::string> domain(dom.begin(), dom.end());
    std::optional<std::size_t> found;
    for (std::size_t d = 0; d <= std::min(b.max_changes, cells.size()) && !found; ++d)
      if (try_changes(work, sigma, o, lambda, a, cells, domain, d, 0)) found = d;
    if (!found) return std::nullopt;
    total += *found;
  }
  return total;
}

std::vector<RepairPoint> exhaustive_repair(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                           const SenseAssignment& lambda, const std::vector<Insertion>& pool,
                                           const Budget& b) {
  require(pool.size() <= b.max_candidates, "oracle: candidate pool too large");
  std::vector<RepairPoint> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << pool.size()); ++mask) {
    Ontology s2 = o;
    RepairPoint pt;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if ((mask >> i) & 1U) {
        pt.ids.push_back(i);
        if (!s2.contains(pool[i].value, pool[i].sense) || !s2.member(pool[i].target, pool[i].value, pool[i].sense)) {
          s2.add_member(pool[i].target, pool[i].value, pool[i].sense);
          ++pt.dist_s;
        }
      }
    auto d = min_data_repair(r, sigma, s2, lambda, b);
    if (!d) continue;
    pt.dist_i = *d;
    out.push_back(pt);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> pareto_quadratic(
    const std::vector<std::pair<std::size_t, std::size_t>>& pts) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& q : pts)
      if (q.first <= p.first && q.second <= p.second && q != p) dominated = true;
    if (!dominated) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AttrSet saturate_closure(AttrSet x, const OfdSet& sigma, std::size_t arity) {
  require(arity <= 12, "oracle: arity too large for saturation");
  const std::size_t subsets = std::size_t{1} << arity;
  std::vector<AttrSet> m(subsets);
  for (std::size_t w = 0; w < subsets; ++w) m[w] = w;  // Identity
  for (const auto& phi : sigma) m[phi.lhs] |= phi.rhs;
  bool changed = true;
  while (changed) {
    changed = false;
    // Composition: W1 -> M(W1), W2 -> M(W2) gives W1 ∪ W2 -> M(W1) ∪ M(W2).
    for (std::size_t w1 = 0; w1 < subsets; ++w1)
      for (std::size_t w2 = w1; w2 < subsets; ++w2) {
        AttrSet u = m[w1] | m[w2];
        if ((m[w1 | w2] | u) != m[w1 | w2]) {
          m[w1 | w2] |= u;
          changed = true;
        }
      }
  }
  // Decomposition: any subset of M(x) is derivable; the closure is M(x) itself.
  return m[x];
}

}  // namespace ofd::oracle
