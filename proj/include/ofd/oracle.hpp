#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ofd/discovery.hpp"
#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"
#include "ofd/sense_assignment.hpp"

// Brute-force reference implementations. Nothing here calls into the
// production algorithms; only the data types are shared.
namespace ofd::oracle {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Budget {
  std::size_t max_tuples = 50;
  std::size_t max_arity = 5;
  std::size_t max_candidates = 10;
  std::size_t max_nodes = 15;
  std::size_t max_bins = 8;
  std::size_t max_changes = 6;  // data edits tried per consequent by exhaustive repair
};

// Direct Def. 1 check of X -> A for one kind, grouping tuples by their X values.
bool holds(const Relation& r, const Ontology& o, AttrSet lhs, AttrId a, OfdKind kind, std::uint32_t theta,
           double kappa);

// Every minimal, non-trivial X -> A (per kind) with |X| < max_level (0 = arity).
OfdSet enumerate_ofds(const Relation& r, const Ontology& o, const DiscoveryConfig& cfg, const Budget& b = {});

// Smallest vertex cover; among equal sizes the lexicographically first.
std::vector<TupleId> exact_min_vertex_cover(std::size_t n, const std::vector<std::pair<TupleId, TupleId>>& edges,
                                            const Budget& b = {});

// Transportation problem with |i-j| ground cost solved by min-cost flow.
// Unequal masses are scaled to unit mass first.
double emd_lp(const std::vector<double>& p, const std::vector<double>& q, const Budget& b = {});

// Best evaluator value for every subset size k of a pool of w candidates.
// The evaluator returns nullopt for infeasible subsets.
std::vector<std::optional<std::size_t>> exhaustive_best_per_k(
    std::size_t w, const std::function<std::optional<std::size_t>(const std::vector<std::size_t>&)>& eval,
    const Budget& b = {});

// Σ satisfaction with classes regrouped from scratch.
bool consistent(const Relation& r, const OfdSet& sigma, const Ontology& o, const SenseAssignment& lambda);

// Fewest cell edits that make r consistent; nullopt if none within budget.
std::optional<std::size_t> min_data_repair(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                           const SenseAssignment& lambda, const Budget& b = {});

struct RepairPoint {
  std::vector<std::size_t> ids;
  std::size_t dist_s = 0;
  std::size_t dist_i = 0;
};

// Exact minimal data repair for every subset of the insertion pool.
std::vector<RepairPoint> exhaustive_repair(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                           const SenseAssignment& lambda, const std::vector<Insertion>& pool,
                                           const Budget& b = {});

// Points no other point beats in one coordinate while matching or beating it in
// the other; equal points survive together. O(n²), sorted.
std::vector<std::pair<std::size_t, std::size_t>> pareto_quadratic(
    const std::vector<std::pair<std::size_t, std::size_t>>& pts);

// Closure by saturating Identity, Decomposition and Composition over a table
// of maximal consequents per antecedent.
AttrSet saturate_closure(AttrSet x, const OfdSet& sigma, std::size_t arity);

}  // namespace ofd::oracle
