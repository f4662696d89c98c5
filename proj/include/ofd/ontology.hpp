#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace ofd {

using ClassId = std::uint32_t;
using SenseId = std::uint32_t;

// Marks a class whose values are unknown to the ontology; only literal
// equality counts as agreement under it.
inline constexpr SenseId kLiteralSense = std::numeric_limits<SenseId>::max();

struct Sense {
  SenseId id = 0;
  std::string name;
};

struct Membership {
  ClassId cls = 0;
  SenseId sense = 0;
  auto operator<=>(const Membership&) const = default;
};

struct ConceptClass {
  ClassId id = 0;
  std::string name;
  std::optional<ClassId> parent;
  std::vector<SenseId> senses;
  std::vector<std::string> synonyms;  // file order, then insertion order
};

struct Insertion {
  std::string value;
  SenseId sense = 0;
  ClassId target = 0;
  auto operator<=>(const Insertion&) const = default;
};

struct OntologyDelta {
  std::vector<Insertion> insertions;
  std::size_t dist() const { return insertions.size(); }
  void merge(const OntologyDelta& other);
};

enum class LcaOutcome { Within, Exceeds, NoCommonAncestor };

class Ontology {
 public:
  SenseId add_sense(const std::string& name);
  // Parent must already exist. Synonyms get every listed sense.
  ClassId add_class(const std::string& name, std::optional<ClassId> parent,
                    const std::vector<SenseId>& senses,
                    const std::vector<std::string>& synonyms);
  // Adds v to the class under the given sense only.
  void add_member(ClassId cls, const std::string& v, SenseId sense);

  std::size_t class_count() const { return classes_.size(); }
  std::size_t sense_count() const { return senses_.size(); }
  bool empty() const { return classes_.empty(); }
  const ConceptClass& concept_class(ClassId c) const;
  const Sense& sense(SenseId s) const;
  std::string sense_name(SenseId s) const;
  std::optional<ClassId> find_class(const std::string& name) const;
  std::optional<SenseId> find_sense(const std::string& name) const;
  ClassId class_id(const std::string& name) const;
  SenseId sense_id(const std::string& name) const;

  std::set<ClassId> names(const std::string& v) const;
  const std::vector<Membership>& memberships(const std::string& v) const;
  bool contains(const std::string& v) const;
  bool contains(const std::string& v, SenseId s) const;
  std::vector<ClassId> classes_of(const std::string& v, SenseId s) const;
  std::vector<SenseId> senses_of(const std::string& v) const;
  bool member(ClassId c, const std::string& v, SenseId s) const;

  std::set<std::string> synonyms(ClassId c) const;
  std::vector<std::string> synonyms(ClassId c, SenseId s) const;
  std::set<std::string> descendants(ClassId c) const;
  const std::vector<ClassId>& children(ClassId c) const;
  std::optional<ClassId> parent(ClassId c) const { return concept_class(c).parent; }
  std::size_t depth(ClassId c) const { return depth_.at(c); }
  // Edges from desc up to anc, or nullopt when anc is not an ancestor-or-self.
  std::optional<std::size_t> ancestor_distance(ClassId desc, ClassId anc) const;
  // First synonym of the class that is a member under s (first synonym if s is literal).
  const std::string& canonical(ClassId c, SenseId s = kLiteralSense) const;
  // Canonical value of v's first class under s, or v itself when v is unknown under s.
  std::string canonical_value(const std::string& v, SenseId s) const;
  // Whether a and b are synonyms under s (literal equality under kLiteralSense).
  bool synonymous(const std::string& a, const std::string& b, SenseId s) const;

  LcaOutcome lca_distance(const std::vector<std::string>& values, std::uint32_t theta) const;

  // Duplicate insertions return an empty delta.
  OntologyDelta add_value(const std::string& v, SenseId s, ClassId target);
  OntologyDelta apply(const std::vector<Insertion>& insertions);

  std::vector<std::string> values() const;
  std::vector<std::string> values(SenseId s) const;

 private:
  friend Ontology parse_ontology(const std::string& text);
  void set_parent(ClassId c, ClassId p);
  void recompute_depths();

  std::vector<Sense> senses_;
  std::unordered_map<std::string, SenseId> sense_index_;
  std::vector<ConceptClass> classes_;
  std::unordered_map<std::string, ClassId> class_index_;
  std::vector<std::vector<ClassId>> children_;
  std::vector<std::size_t> depth_;
  // per class: value -> senses it is a member under
  std::vector<std::unordered_map<std::string, std::vector<SenseId>>> members_;
  std::unordered_map<std::string, std::vector<Membership>> value_index_;
};

Ontology parse_ontology(const std::string& text);
Ontology load_ontology(const std::string& path);
std::string ontology_to_json(const Ontology& o);
void save_ontology(const std::string& path, const Ontology& o);

}  // namespace ofd
