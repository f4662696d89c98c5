#include "ofd/sense_assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace ofd {

SenseId SenseAssignment::sense_of(std::size_t ofd, TupleId t) const {
  const auto& os = per_ofd.at(ofd);
  return os.classes[os.class_of.at(t)].sense;
}

void SenseAssignment::set(std::size_t ofd, TupleId rep, SenseId s) {
  auto& os = per_ofd.at(ofd);
  auto& cs = os.classes[os.class_of.at(rep)];
  if (cs.rep != rep) throw std::invalid_argument("tuple " + std::to_string(rep) + " is not a class representative");
  cs.sense = s;
}

SenseIndex build_sense_index(const Ontology& o) {
  SenseIndex idx;
  for (const auto& v : o.values()) idx.emplace(v, o.senses_of(v));
  return idx;
}

std::vector<std::string> mad_rank(const std::vector<std::pair<std::string, std::size_t>>& freq) {
  if (freq.empty()) return {};
  std::vector<double> f;
  for (const auto& [_, c] : freq) f.push_back(static_cast<double>(c));
  std::sort(f.begin(), f.end());
  double median = f.size() % 2 ? f[f.size() / 2] : (f[f.size() / 2 - 1] + f[f.size() / 2]) / 2.0;
  std::vector<std::pair<std::string, std::size_t>> sorted(freq);
  std::sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) {
    // signed deviation: frequent values lead, rare outliers (often errors) go last
    double sx = static_cast<double>(x.second) - median;
    double sy = static_cast<double>(y.second) - median;
    if (sx != sy) return sx > sy;
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::string> out;
  for (auto& [v, _] : sorted) out.push_back(v);
  return out;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> frequencies(const Relation& r, const std::vector<TupleId>& cls,
                                                             AttrId a) {
  std::map<std::string, std::size_t> counts;
  for (auto t : cls) ++counts[r.value(t, a)];
  return {counts.begin(), counts.end()};
}

bool covered(const Ontology& o, const std::string& v, SenseId s) {
  return s != kLiteralSense && o.contains(v, s);
}

bool senses_overlap(const Ontology& o, SenseId a, SenseId b) {
  if (a == kLiteralSense || b == kLiteralSense) return false;
  if (a == b) return !o.values(a).empty();
  auto va = o.values(a);
  auto vb = o.values(b);
  std::vector<std::string> both;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(both));
  return !both.empty();
}

}  // namespace

std::vector<std::string> mad_rank(const Relation& r, const std::vector<TupleId>& cls, AttrId a) {
  return mad_rank(frequencies(r, cls, a));
}

InitialChoice initial_assignment(const Relation& r, const std::vector<TupleId>& cls, AttrId a,
                                 const Ontology& o, const SenseIndex& sset, SenseCounters* counters) {
  InitialChoice choice;
  auto freq = frequencies(r, cls, a);
  std::vector<const std::vector<SenseId>*> ranked;
  for (const auto& v : mad_rank(freq)) {
    auto it = sset.find(v);
    // Values unknown to the ontology cannot contribute a sense; they are
    // skipped so the shrinking prefix always reaches a known value.
    if (it != sset.end() && !it->second.empty()) ranked.push_back(&it->second);
  }
  if (ranked.empty()) return choice;
  for (std::size_t k = ranked.size(); k >= 1 && choice.potential.empty(); --k) {
    std::vector<SenseId> acc = *ranked[0];
    for (std::size_t i = 1; i < k && !acc.empty(); ++i) {
      std::vector<SenseId> next;
      std::set_intersection(acc.begin(), acc.end(), ranked[i]->begin(), ranked[i]->end(),
                            std::back_inserter(next));
      acc.swap(next);
      if (counters) ++counters->intersections;
    }
    choice.potential = acc;
  }
  std::size_t best = 0;
  bool have = false;
  for (auto s : choice.potential) {
    if (counters) ++counters->coverage_evaluations;
    std::size_t cov = 0;
    for (const auto& [v, c] : freq)
      if (o.contains(v, s)) cov += c;
    if (!have || cov > best) {
      best = cov;
      choice.sense = s;
      have = true;
    }
  }
  choice.coverage = best;
  return choice;
}

ClassDistribution class_distribution(const Relation& r, const std::vector<TupleId>& tuples, AttrId a,
                                     const Ontology& o, SenseId s) {
  ClassDistribution d;
  for (auto t : tuples) {
    const auto& v = r.value(t, a);
    if (covered(o, v, s)) {
      auto cls = o.classes_of(v, s).front();
      const auto& canon = o.canonical(cls, s);
      d.mass[canon] += 1.0;
      auto [it, fresh] = d.canonical_rank.emplace(canon, cls);
      if (!fresh) it->second = std::min(it->second, cls);
    } else {
      d.mass[v] += 1.0;
    }
  }
  return d;
}

AlignedHistograms align(const ClassDistribution& x, const ClassDistribution& y) {
  std::map<std::string, ClassId> rank(x.canonical_rank);
  for (const auto& [v, c] : y.canonical_rank) {
    auto [it, fresh] = rank.emplace(v, c);
    if (!fresh) it->second = std::min(it->second, c);
  }
  std::set<std::string> all;
  for (const auto& [v, _] : x.mass) all.insert(v);
  for (const auto& [v, _] : y.mass) all.insert(v);
  std::vector<std::string> bins(all.begin(), all.end());
  std::stable_sort(bins.begin(), bins.end(), [&](const std::string& p, const std::string& q) {
    auto ip = rank.find(p), iq = rank.find(q);
    bool cp = ip != rank.end(), cq = iq != rank.end();
    if (cp != cq) return cp;
    if (cp && ip->second != iq->second) return ip->second < iq->second;
    return p < q;
  });
  AlignedHistograms h;
  h.bins = bins;
  for (const auto& b : bins) {
    auto ix = x.mass.find(b), iy = y.mass.find(b);
    h.p.push_back(ix == x.mass.end() ? 0.0 : ix->second);
    h.q.push_back(iy == y.mass.end() ? 0.0 : iy->second);
  }
  return h;
}

double emd_1d(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("emd_1d: histograms over different bins");
  double sp = 0, sq = 0;
  for (auto v : p) sp += v;
  for (auto v : q) sq += v;
  if (sp == 0 && sq == 0) return 0.0;
  if (sp == 0 || sq == 0) throw std::invalid_argument("emd_1d: mass mismatch (one side is empty)");
  bool normalize = std::fabs(sp - sq) > 1e-12 * std::max(sp, sq);
  double fp = normalize ? 1.0 / sp : 1.0, fq = normalize ? 1.0 / sq : 1.0;
  double carry = 0, total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    carry += p[i] * fp - q[i] * fq;
    total += std::fabs(carry);
  }
  return total;
}

double emd_1d(const ClassDistribution& x, const ClassDistribution& y) {
  auto h = align(x, y);
  return emd_1d(h.p, h.q);
}

std::size_t outlier_tuples(const Relation& r, const std::vector<TupleId>& tuples, AttrId a,
                           const Ontology& o, SenseId s) {
  std::size_t n = 0;
  for (auto t : tuples)
    if (!covered(o, r.value(t, a), s)) ++n;
  return n;
}

CostOptions repair_cost_options(const Relation& r, AttrId a, const std::vector<TupleId>& x,
                                const std::vector<TupleId>& xp, SenseId lx, SenseId lxp,
                                const Ontology& o) {
  std::vector<TupleId> sx(x), sxp(xp), omega;
  std::sort(sx.begin(), sx.end());
  std::sort(sxp.begin(), sxp.end());
  std::set_intersection(sx.begin(), sx.end(), sxp.begin(), sxp.end(), std::back_inserter(omega));
  CostOptions c;
  std::set<std::string> rho_x, rho_xp;
  for (auto t : omega) {
    const auto& v = r.value(t, a);
    if (!covered(o, v, lx)) rho_x.insert(v);
    if (!covered(o, v, lxp)) rho_xp.insert(v);
  }
  c.ontology = rho_x.size() + rho_xp.size();
  if (senses_overlap(o, lx, lxp))
    c.data = outlier_tuples(r, omega, a, o, lx) + outlier_tuples(r, omega, a, o, lxp);
  auto rx = static_cast<long>(outlier_tuples(r, x, a, o, lx));
  auto rxp = static_cast<long>(outlier_tuples(r, xp, a, o, lxp));
  c.reassign_x = static_cast<long>(outlier_tuples(r, x, a, o, lxp)) - rx;
  c.reassign_xp = static_cast<long>(outlier_tuples(r, xp, a, o, lx)) - rxp;
  return c;
}

SenseAssignment initial_senses(const Relation& r, const OfdSet& sigma, const Ontology& o,
                               SenseCounters* counters) {
  auto sset = build_sense_index(o);
  SenseAssignment lambda;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const auto& phi = sigma[i];
    if (attr_count(phi.rhs) != 1) throw std::invalid_argument("sense assignment needs single-attribute consequents");
    OfdSenses os;
    os.ofd = i;
    os.consequent = attr_members(phi.rhs)[0];
    os.class_of.assign(r.size(), 0);
    auto part = partition_of(r, phi.lhs);
    for (auto& cls : part.classes) {
      ClassSense cs;
      cs.rep = cls.front();
      for (auto t : cls) os.class_of[t] = static_cast<std::uint32_t>(os.classes.size());
      if (phi.kind != OfdKind::Traditional) {
        auto choice = initial_assignment(r, cls, os.consequent, o, sset, counters);
        cs.sense = choice.sense;
        cs.potential = std::move(choice.potential);
      }
      cs.tuples = std::move(cls);
      os.classes.push_back(std::move(cs));
    }
    lambda.per_ofd.push_back(std::move(os));
  }
  return lambda;
}

std::size_t DependencyGraph::vertex_of(std::size_t ofd, TupleId rep, const SenseAssignment& lambda) const {
  const auto& os = lambda.per_ofd.at(ofd);
  std::size_t cls = os.class_of.at(rep);
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].ofd == ofd && vertices[v].cls == cls) return v;
  throw std::out_of_range("class is not a dependency-graph vertex");
}

double edge_weight(const Relation& r, const Ontology& o, const SenseAssignment& lambda,
                   const DependencyGraph& g, const DepEdge& e) {
  const auto& u = g.vertices[e.u];
  const auto& v = g.vertices[e.v];
  SenseId su = lambda.per_ofd[u.ofd].classes[u.cls].sense;
  SenseId sv = lambda.per_ofd[v.ofd].classes[v.cls].sense;
  return emd_1d(class_distribution(r, e.overlap, e.consequent, o, su),
                class_distribution(r, e.overlap, e.consequent, o, sv));
}

DependencyGraph build_dependency_graph(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                       const SenseAssignment& lambda) {
  DependencyGraph g;
  std::map<AttrId, std::vector<std::size_t>> by_consequent;
  for (std::size_t i = 0; i < lambda.per_ofd.size(); ++i)
    if (sigma.at(i).kind != OfdKind::Traditional) by_consequent[lambda.per_ofd[i].consequent].push_back(i);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> vid;
  auto vertex = [&](std::size_t ofd, std::size_t cls) {
    auto [it, fresh] = vid.try_emplace({ofd, cls}, g.vertices.size());
    if (fresh) {
      g.vertices.push_back({ofd, cls});
      g.incident.emplace_back();
    }
    return it->second;
  };
  for (const auto& [a, ofds] : by_consequent) {
    if (ofds.size() < 2) continue;
    for (auto i : ofds)
      for (std::size_t c = 0; c < lambda.per_ofd[i].classes.size(); ++c) vertex(i, c);
    for (std::size_t x = 0; x < ofds.size(); ++x)
      for (std::size_t y = x + 1; y < ofds.size(); ++y) {
        const auto& oi = lambda.per_ofd[ofds[x]];
        const auto& oj = lambda.per_ofd[ofds[y]];
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<TupleId>> overlaps;
        for (TupleId t = 0; t < r.size(); ++t) overlaps[{oi.class_of[t], oj.class_of[t]}].push_back(t);
        for (auto& [key, tuples] : overlaps) {
          DepEdge e;
          e.u = vertex(ofds[x], key.first);
          e.v = vertex(ofds[y], key.second);
          e.consequent = a;
          e.overlap = std::move(tuples);
          g.incident[e.u].push_back(g.edges.size());
          g.incident[e.v].push_back(g.edges.size());
          g.edges.push_back(std::move(e));
        }
      }
  }
  for (auto& e : g.edges) e.weight = edge_weight(r, o, lambda, g, e);
  return g;
}

namespace {

SenseId& sense_ref(SenseAssignment& lambda, const DependencyGraph& g, std::size_t v) {
  return lambda.per_ofd[g.vertices[v].ofd].classes[g.vertices[v].cls].sense;
}

const std::vector<TupleId>& tuples_of(const SenseAssignment& lambda, const DependencyGraph& g, std::size_t v) {
  return lambda.per_ofd[g.vertices[v].ofd].classes[g.vertices[v].cls].tuples;
}

}  // namespace

SenseAssignment local_refinement(DependencyGraph& g, SenseAssignment lambda, const Relation& r,
                                 const Ontology& o, double theta_emd, RefinementTrace* trace) {
  const std::size_t nv = g.vertices.size();
  std::vector<char> visited(nv, 0), evaluated(g.edges.size(), 0);
  auto score = [&](std::size_t v) {
    double s = 0;
    for (auto e : g.incident[v]) s += g.edges[e].weight;
    return s;
  };
  auto refresh = [&](std::size_t v) {
    for (auto e : g.incident[v]) g.edges[e].weight = edge_weight(r, o, lambda, g, g.edges[e]);
  };
  for (;;) {
    std::optional<std::size_t> start;
    double best = -1;
    for (std::size_t v = 0; v < nv; ++v)
      if (!visited[v] && score(v) > best) {
        best = score(v);
        start = v;
      }
    if (!start) break;
    std::deque<std::size_t> queue{*start};
    visited[*start] = 1;
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      if (trace) trace->visit_order.push_back(u);
      std::vector<std::size_t> edges(g.incident[u]);
      std::stable_sort(edges.begin(), edges.end(),
                       [&](std::size_t a, std::size_t b) { return g.edges[a].weight > g.edges[b].weight; });
      for (auto eid : edges) {
        auto& e = g.edges[eid];
        std::size_t v = e.u == u ? e.v : e.u;
        if (!visited[v]) {
          visited[v] = 1;
          queue.push_back(v);
        }
        if (evaluated[eid] || e.weight <= theta_emd) continue;
        evaluated[eid] = 1;
        SenseId su = sense_ref(lambda, g, u), sv = sense_ref(lambda, g, v);
        RefinementStep step;
        step.from = u;
        step.to = v;
        step.weight = e.weight;
        step.costs = repair_cost_options(r, e.consequent, tuples_of(lambda, g, u), tuples_of(lambda, g, v), su,
                                         sv, o);
        // Ties prefer reassigning the neighbor, then the current class, then ontology, then data.
        std::vector<std::pair<long, AlignOption>> options{
            {step.costs.reassign_xp, AlignOption::ReassignNeighbor},
            {step.costs.reassign_x, AlignOption::ReassignCurrent},
            {static_cast<long>(step.costs.ontology), AlignOption::Ontology}};
        if (step.costs.data) options.push_back({static_cast<long>(*step.costs.data), AlignOption::Data});
        auto chosen = *std::min_element(options.begin(), options.end(),
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
        step.chosen = chosen.second;
        if (chosen.second == AlignOption::ReassignNeighbor || chosen.second == AlignOption::ReassignCurrent) {
          std::size_t target = chosen.second == AlignOption::ReassignNeighbor ? v : u;
          SenseId& slot = sense_ref(lambda, g, target);
          SenseId old = slot;
          slot = target == v ? su : sv;
          double w2 = edge_weight(r, o, lambda, g, e);
          step.new_weight = w2;
          if (w2 < e.weight) {
            step.committed = true;
            refresh(target);
          } else {
            slot = old;
          }
        }
        if (trace) trace->steps.push_back(step);
      }
    }
  }
  return lambda;
}

SenseAssignment sense_assignment(const Relation& r, const OfdSet& sigma, const Ontology& o, double theta_emd,
                                 RefinementTrace* trace, SenseCounters* counters) {
  auto lambda = initial_senses(r, sigma, o, counters);
  auto g = build_dependency_graph(r, sigma, o, lambda);
  if (g.edges.empty()) return lambda;
  return local_refinement(g, std::move(lambda), r, o, theta_emd, trace);
}

using nlohmann::json;

std::string lambda_to_json(const SenseAssignment& lambda, const Ontology& o) {
  json out = json::array();
  for (const auto& os : lambda.per_ofd)
    for (const auto& cs : os.classes)
      out.push_back({{"ofd", os.ofd}, {"rep", cs.rep}, {"sense", o.sense_name(cs.sense)}});
  return out.dump(2) + "\n";
}

SenseAssignment lambda_from_json(const std::string& text, const Relation& r, const OfdSet& sigma,
                                 const Ontology& o) {
  auto lambda = initial_senses(r, sigma, o);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("sense assignment: ") + e.what());
  }
  for (const auto& item : doc) {
    auto ofd = item.at("ofd").get<std::size_t>();
    auto rep = item.at("rep").get<TupleId>();
    if (ofd >= lambda.per_ofd.size() || rep >= r.size()) throw InputError("sense assignment entry out of range");
    try {
      lambda.set(ofd, rep, o.sense_id(item.at("sense").get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  return lambda;
}

}  // namespace ofd
