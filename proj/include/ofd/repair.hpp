#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"
#include "ofd/sense_assignment.hpp"

namespace ofd {

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

// Rejects Σ unless every OFD is syn or fd and no attribute is an antecedent of
// one OFD and the consequent of another. Throws InputError.
void validate_repair_sigma(const OfdSet& sigma);

// True when the class's values share a concept under s, or are all equal.
bool class_consistent(const Ontology& o, const std::vector<std::string>& values, SenseId s);

// I ⊨ Σ w.r.t. S under Λ.
bool satisfies(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda);

std::vector<Insertion> collect_candidates(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                          const SenseAssignment& lambda);

struct EdgeLabel {
  std::size_t ofd = 0;
  SenseId sense = kLiteralSense;
  auto operator<=>(const EdgeLabel&) const = default;
};

struct ConflictEdge {
  TupleId u = 0, v = 0;  // u < v
  std::vector<EdgeLabel> labels;
};

struct ConflictGraph {
  std::size_t n = 0;
  std::vector<ConflictEdge> edges;  // sorted by (u, v)
  std::vector<std::pair<TupleId, TupleId>> pairs() const;
};

ConflictGraph build_conflict_graph(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                   const SenseAssignment& lambda);

// Maximal matching over edges in (u, v) order, then vertices whose edges are
// all covered by other cover vertices are dropped in ascending id order.
std::vector<TupleId> approx_vertex_cover(std::size_t n, const std::vector<std::pair<TupleId, TupleId>>& edges);
std::vector<TupleId> approx_vertex_cover(const ConflictGraph& g);

std::size_t delta_p(const OfdSet& sigma, std::size_t cover_size);

struct CellChange {
  TupleId tuple = 0;
  AttrId attr = 0;
  std::string old_value;
  std::string new_value;
};

enum class RepairStrategy { Best, Cover, LargestGroup };

struct DataRepair {
  bool consistent = false;   // the repaired instance satisfies Σ
  bool feasible = false;     // consistent and changes ≤ τ
  std::vector<CellChange> changes;
  Relation repaired;
  std::vector<TupleId> cover;  // of the initial conflict graph
  std::size_t delta_p = 0;
  std::size_t dist() const { return changes.size(); }
};

DataRepair repair_data(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                       std::size_t tau = kNoLimit, RepairStrategy strategy = RepairStrategy::Best);

struct RepairPair {
  std::vector<std::size_t> candidate_ids;  // indices into the candidate pool
  OntologyDelta ontology;
  std::vector<CellChange> data;
  std::size_t dist_s = 0;
  std::size_t dist_i = 0;
  std::size_t delta_p = 0;
};

struct BeamConfig {
  std::optional<std::size_t> beam;   // default floor(|Cand|/e), at least 1
  std::size_t tau = kNoLimit;
  std::optional<std::size_t> k_max;  // default |Cand|
  bool stop_at_first_feasible = false;
  unsigned threads = 1;
  RepairStrategy strategy = RepairStrategy::Best;
};

struct BeamLevel {
  std::size_t k = 0;
  std::size_t evaluated = 0;
  std::size_t best_delta = 0;
  std::vector<std::size_t> best_ids;
};

struct SearchResult {
  std::vector<Insertion> pool;
  std::size_t beam = 0;
  std::vector<std::optional<RepairPair>> best_per_k;  // index k; nullopt when no feasible node
  std::vector<BeamLevel> levels;
  std::vector<RepairPair> pairs() const;
};

SearchResult ontology_repair_search(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                    const SenseAssignment& lambda, const BeamConfig& cfg);

// Realized data-repair count after inserting the chosen candidates.
std::size_t repair_cost(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                        const std::vector<Insertion>& pool, const std::vector<std::size_t>& ids,
                        RepairStrategy strategy = RepairStrategy::Best);

// Pairs not dominated on (dist_s, dist_i): q dominates p when it is no worse
// in both coordinates and better in one. Sorted by (dist_s, dist_i).
std::vector<RepairPair> pareto_front(const std::vector<RepairPair>& pairs);
std::vector<std::pair<std::size_t, std::size_t>> pareto_front(const std::vector<std::pair<std::size_t, std::size_t>>& pts);

// Applies a pair and re-checks consistency, the τ bound and the δ_P bound.
bool verify_pair(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda,
                 const RepairPair& pair, std::size_t tau);

std::string repairs_to_json(const SearchResult& result, const std::vector<RepairPair>& front, const Relation& r,
                            const Ontology& o);

}  // namespace ofd
