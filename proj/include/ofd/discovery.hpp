#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"

namespace ofd {

struct DiscoveryConfig {
  bool synonym = true;
  bool inheritance = false;
  bool traditional = false;
  std::uint32_t theta = 0;
  double kappa = 1.0;
  bool opt2 = true;
  bool opt3 = true;
  bool opt4 = true;
  std::size_t max_level = 0;  // 0 means the arity
  unsigned threads = 1;
};

struct LevelStats {
  std::size_t level = 0;
  std::size_t nodes = 0;
  std::uint64_t generated = 0;
  std::uint64_t verified = 0;
  std::size_t ofds = 0;
  double seconds = 0.0;
};

struct DiscoveryStats {
  std::uint64_t generated = 0;
  std::uint64_t verified = 0;
  std::uint64_t pruned_opt2 = 0;
  std::uint64_t pruned_opt3 = 0;
  std::uint64_t key_shortcuts = 0;  // candidates accepted because the antecedent is a key
  std::uint64_t lookups = 0;        // names() lookups during verification
  std::vector<LevelStats> levels;
  std::size_t max_senses_per_value = 0;
  double mean_senses_per_value = 0.0;
  double seconds = 0.0;
  std::uint64_t pruned() const { return pruned_opt2 + pruned_opt3; }
};

struct DiscoveryResult {
  OfdSet ofds;
  DiscoveryStats stats;
};

// Per-attribute table of ontology memberships for every distinct value,
// built once so verification never touches the string index.
class ValueIndex {
 public:
  ValueIndex(const Relation& r, const Ontology& o, bool with_ancestors, std::uint32_t theta);
  // Sorted keys (sense << 32 | class) of the value's memberships.
  const std::vector<std::uint64_t>& keys(AttrId a, std::uint32_t code) const { return keys_[a][code]; }
  // Sorted keys (sense << 32 | ancestor) reachable within theta edges.
  const std::vector<std::uint64_t>& reach(AttrId a, std::uint32_t code) const { return reach_[a][code]; }
  std::size_t max_senses() const { return max_senses_; }
  double mean_senses() const { return mean_senses_; }

 private:
  std::vector<std::vector<std::vector<std::uint64_t>>> keys_;
  std::vector<std::vector<std::vector<std::uint64_t>>> reach_;
  std::size_t max_senses_ = 0;
  double mean_senses_ = 0.0;
};

// Checks X -> A for one kind over classes of Π_X. Tuples not covered by
// `classes` are singletons; with `count_singletons` they are visited (and cost
// lookups unless Opt-4 is on), otherwise they are credited directly.
class Verifier {
 public:
  Verifier(const Relation& r, const ValueIndex& index, std::size_t n);
  bool check(OfdKind kind, const std::vector<EqClass>& classes, AttrId a, double kappa,
             bool opt4, bool count_singletons);
  std::uint64_t lookups() const { return lookups_; }

 private:
  std::size_t coverage(OfdKind kind, const EqClass& cls, AttrId a, bool exact, bool opt4);

  const Relation& r_;
  const ValueIndex& index_;
  std::size_t n_;
  std::uint64_t lookups_ = 0;
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> distinct_;
  std::unordered_map<std::uint64_t, std::size_t> tally_;
  std::vector<std::uint64_t> scratch_;
};

bool check_synonym(const Relation& r, const Ontology& o, const std::vector<EqClass>& classes,
                   AttrId a, double kappa = 1.0);
bool check_inheritance(const Relation& r, const Ontology& o, const std::vector<EqClass>& classes,
                       AttrId a, std::uint32_t theta, double kappa = 1.0);
bool check_traditional(const Relation& r, const std::vector<EqClass>& classes, AttrId a,
                       double kappa = 1.0);

struct LatticeNode {
  AttrSet attrs = 0;
  StrippedPartition partition;
  std::array<AttrSet, 3> cplus{};  // indexed by OfdKind
};

struct LatticeLevel {
  std::size_t level = 0;
  std::vector<LatticeNode> nodes;
};

// Prefix-block join with the Apriori subset check. C⁺ of new nodes is left empty.
LatticeLevel calculate_next_level(const LatticeLevel& level, unsigned threads = 1);

DiscoveryResult fastofd(const Relation& r, const Ontology& o, const DiscoveryConfig& cfg);

std::vector<OfdKind> requested_kinds(const DiscoveryConfig& cfg);

}  // namespace ofd
