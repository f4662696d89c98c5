#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ofd/relation.hpp"

namespace ofd {

enum class OfdKind : std::uint8_t { Synonym, Inheritance, Traditional };

struct Ofd {
  AttrSet lhs = 0;
  AttrSet rhs = 0;
  OfdKind kind = OfdKind::Synonym;
  std::uint32_t theta = 0;  // inheritance only
  double support = 1.0;

  // Identity ignores support.
  bool same(const Ofd& o) const {
    return lhs == o.lhs && rhs == o.rhs && kind == o.kind &&
           (kind != OfdKind::Inheritance || theta == o.theta);
  }
  bool operator==(const Ofd& o) const { return same(o); }
};

using OfdSet = std::vector<Ofd>;

const char* kind_name(OfdKind k);

// Removes later duplicates, keeping first occurrences.
OfdSet dedupe(const OfdSet& sigma);
// Splits X -> YZ into X -> Y, X -> Z.
OfdSet decompose(const OfdSet& sigma);

std::string format_ofd(const Ofd& phi, const std::vector<std::string>& schema);
// Format: "X1,X2 -> A[,B] [syn|inh:θ|fd] [support=κ]"; kind defaults to syn.
Ofd parse_ofd(std::string_view line, const std::vector<std::string>& schema);
OfdSet read_ofds(std::istream& in, const std::vector<std::string>& schema);
OfdSet load_ofds(const std::string& path, const std::vector<std::string>& schema);
void write_ofds(std::ostream& out, const OfdSet& sigma, const std::vector<std::string>& schema);

// Throws std::invalid_argument when sigma mixes kinds.
AttrSet closure(AttrSet x, const OfdSet& sigma);
bool implies(const OfdSet& sigma, const Ofd& phi);
OfdSet minimal_cover(const OfdSet& sigma);

}  // namespace ofd
