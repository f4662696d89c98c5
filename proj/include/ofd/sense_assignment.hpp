#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"

namespace ofd {

struct ClassSense {
  TupleId rep = 0;               // smallest tuple id of the class
  std::vector<TupleId> tuples;
  SenseId sense = kLiteralSense;
  std::vector<SenseId> potential;
};

struct OfdSenses {
  std::size_t ofd = 0;
  AttrId consequent = 0;
  std::vector<ClassSense> classes;
  std::vector<std::uint32_t> class_of;  // tuple -> index into classes
};

// Λ: one sense per equivalence class (singletons included) of every OFD.
struct SenseAssignment {
  std::vector<OfdSenses> per_ofd;

  SenseId sense_of(std::size_t ofd, TupleId t) const;
  // Sets the sense of the class whose representative is rep.
  void set(std::size_t ofd, TupleId rep, SenseId s);
};

using SenseIndex = std::unordered_map<std::string, std::vector<SenseId>>;
SenseIndex build_sense_index(const Ontology& o);

struct SenseCounters {
  std::uint64_t coverage_evaluations = 0;
  std::uint64_t intersections = 0;
};

// Distinct values by decreasing |f - median f|, then decreasing f, then value.
std::vector<std::string> mad_rank(const std::vector<std::pair<std::string, std::size_t>>& freq);
std::vector<std::string> mad_rank(const Relation& r, const std::vector<TupleId>& cls, AttrId a);

struct InitialChoice {
  SenseId sense = kLiteralSense;
  std::vector<SenseId> potential;
  std::size_t coverage = 0;
};

InitialChoice initial_assignment(const Relation& r, const std::vector<TupleId>& cls, AttrId a,
                                 const Ontology& o, const SenseIndex& sset,
                                 SenseCounters* counters = nullptr);

// Histogram over canonicalized values of the given tuples under sense s.
struct ClassDistribution {
  std::map<std::string, double> mass;
  std::map<std::string, ClassId> canonical_rank;  // bins that are a class's canonical value
};

ClassDistribution class_distribution(const Relation& r, const std::vector<TupleId>& tuples, AttrId a,
                                     const Ontology& o, SenseId s);

struct AlignedHistograms {
  std::vector<std::string> bins;
  std::vector<double> p, q;
};

// Canonical bins first by class order, then remaining bins lexicographically.
AlignedHistograms align(const ClassDistribution& x, const ClassDistribution& y);

// Prefix-scan EMD with |i-j| ground distance. Unequal masses are normalized
// to unit mass; one empty side is an error.
double emd_1d(const std::vector<double>& p, const std::vector<double>& q);
double emd_1d(const ClassDistribution& x, const ClassDistribution& y);

struct CostOptions {
  std::size_t ontology = 0;
  std::optional<std::size_t> data;  // nullopt when the senses share no value
  long reassign_x = 0;              // x takes λ′
  long reassign_xp = 0;             // x′ takes λ
};

// Tuples of `tuples` whose value is not covered by s.
std::size_t outlier_tuples(const Relation& r, const std::vector<TupleId>& tuples, AttrId a,
                           const Ontology& o, SenseId s);

CostOptions repair_cost_options(const Relation& r, AttrId a, const std::vector<TupleId>& x,
                                const std::vector<TupleId>& xp, SenseId lx, SenseId lxp,
                                const Ontology& o);

struct DepVertex {
  std::size_t ofd = 0;  // index into SenseAssignment::per_ofd
  std::size_t cls = 0;
};

struct DepEdge {
  std::size_t u = 0, v = 0;
  AttrId consequent = 0;
  std::vector<TupleId> overlap;
  double weight = 0.0;
};

struct DependencyGraph {
  std::vector<DepVertex> vertices;
  std::vector<DepEdge> edges;
  std::vector<std::vector<std::size_t>> incident;  // vertex -> edge ids
  std::size_t vertex_of(std::size_t ofd, TupleId rep, const SenseAssignment& lambda) const;
};

DependencyGraph build_dependency_graph(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                       const SenseAssignment& lambda);

double edge_weight(const Relation& r, const Ontology& o, const SenseAssignment& lambda,
                   const DependencyGraph& g, const DepEdge& e);

enum class AlignOption { ReassignNeighbor, ReassignCurrent, Ontology, Data };

struct RefinementStep {
  std::size_t from = 0, to = 0;  // vertex ids; `to` is the neighbor
  double weight = 0.0;
  CostOptions costs;
  AlignOption chosen = AlignOption::Data;
  std::optional<double> new_weight;  // set when a reassignment was tried
  bool committed = false;
};

struct RefinementTrace {
  std::vector<std::size_t> visit_order;
  std::vector<RefinementStep> steps;
};

SenseAssignment local_refinement(DependencyGraph& g, SenseAssignment lambda, const Relation& r,
                                 const Ontology& o, double theta_emd,
                                 RefinementTrace* trace = nullptr);

// Initial senses only (no refinement). Traditional OFDs get the literal sense.
SenseAssignment initial_senses(const Relation& r, const OfdSet& sigma, const Ontology& o,
                               SenseCounters* counters = nullptr);

SenseAssignment sense_assignment(const Relation& r, const OfdSet& sigma, const Ontology& o,
                                 double theta_emd = 10.0, RefinementTrace* trace = nullptr,
                                 SenseCounters* counters = nullptr);

std::string lambda_to_json(const SenseAssignment& lambda, const Ontology& o);
SenseAssignment lambda_from_json(const std::string& text, const Relation& r, const OfdSet& sigma,
                                 const Ontology& o);

}  // namespace ofd
