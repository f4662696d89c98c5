#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ofd/inference.hpp"
#include "ofd/ontology.hpp"
#include "ofd/relation.hpp"
#include "ofd/repair.hpp"
#include "ofd/sense_assignment.hpp"

namespace ofd {

// Generator for benchmark and accuracy fixtures. Attributes come in planted
// pairs K_i -> V_i (syn), followed by noise columns N_j.
struct SyntheticSpec {
  std::size_t tuples = 1000;
  std::size_t arity = 6;
  std::size_t pairs = 2;        // planted K -> V pairs, clamped to arity / 2
  std::size_t senses = 4;
  std::size_t concepts = 40;
  std::size_t synonyms = 3;     // per-sense names per concept
  std::size_t class_size = 20;  // mean tuples per antecedent value
  std::size_t noise_domain = 0; // 0 = grows with the column index
  std::uint64_t seed = 1;
};

struct Synthetic {
  Relation relation;
  Ontology ontology;
  OfdSet sigma;  // the planted dependencies
};

Synthetic make_synthetic(const SyntheticSpec& spec);

struct InjectionSpec {
  double err = 0.0;            // fraction of consequent cells corrupted
  double inc = 0.0;            // fraction of ontology values withheld
  double out_of_domain = 0.5;  // share of errors that use a fresh value
  std::uint64_t seed = 1;
};

struct InjectedError {
  TupleId tuple = 0;
  AttrId attr = 0;
  std::string clean;
  std::string dirty;
  bool out_of_domain = false;
};

struct WithheldValue {
  std::string value;
  SenseId sense = 0;
  ClassId cls = 0;
};

struct Injection {
  Relation dirty;
  Ontology reduced;
  std::vector<InjectedError> errors;
  std::vector<WithheldValue> withheld;
};

// Corrupts cells of the given attributes and withholds ontology memberships.
// Deterministic for a given seed. Throws InputError on out-of-range rates.
Injection inject_errors(const Relation& r, const Ontology& o, AttrSet attrs, const InjectionSpec& spec);

// Copy of o without the listed memberships; class and sense ids are kept.
Ontology without_members(const Ontology& o, const std::vector<WithheldValue>& drop);

std::string injection_log_json(const Injection& inj, const Relation& r, const Ontology& o);

struct Score {
  std::size_t repaired = 0;
  std::size_t correct = 0;
  std::size_t injected = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t insertions = 0;
  std::size_t insertions_correct = 0;  // inserted values that had been withheld
  double ontology_precision = 0.0;
  double ontology_recall = 0.0;
};

// A repaired cell is correct when it is restored to the clean value, or to a
// value synonymous with it under the class's sense in the repaired ontology.
Score score_repairs(const RepairPair& pair, const Injection& inj, const OfdSet& sigma, const Ontology& repaired,
                    const SenseAssignment& lambda);

}  // namespace ofd
