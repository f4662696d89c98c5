#include "ofd/inference.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ofd {

const char* kind_name(OfdKind k) {
  switch (k) {
    case OfdKind::Synonym: return "syn";
    case OfdKind::Inheritance: return "inh";
    case OfdKind::Traditional: return "fd";
  }
  return "?";
}

OfdSet dedupe(const OfdSet& sigma) {
  OfdSet out;
  for (const auto& phi : sigma) {
    bool dup = false;
    for (const auto& psi : out) dup = dup || psi.same(phi);
    if (!dup) out.push_back(phi);
  }
  return out;
}

OfdSet decompose(const OfdSet& sigma) {
  OfdSet out;
  for (const auto& phi : sigma)
    for (auto a : attr_members(phi.rhs)) {
      Ofd single = phi;
      single.rhs = attr_bit(a);
      out.push_back(single);
    }
  return dedupe(out);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

AttrSet parse_attrs(std::string_view text, const std::vector<std::string>& schema, std::string_view line) {
  AttrSet out = 0;
  text = trim(text);
  if (text.empty()) return 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto name = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    bool found = false;
    for (std::size_t a = 0; a < schema.size(); ++a)
      if (schema[a] == name) {
        out |= attr_bit(a);
        found = true;
      }
    if (!found)
      throw InputError("unknown attribute '" + std::string(name) + "' in '" + std::string(line) + "'");
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_attrs(AttrSet s, const std::vector<std::string>& schema) {
  std::string out;
  for (auto a : attr_members(s)) {
    if (!out.empty()) out += ',';
    out += schema.at(a);
  }
  return out;
}

void check_uniform(const OfdSet& sigma, const Ofd* phi) {
  const Ofd* first = phi ? phi : (sigma.empty() ? nullptr : &sigma.front());
  if (!first) return;
  for (const auto& psi : sigma)
    if (psi.kind != first->kind)
      throw std::invalid_argument("inference over mixed OFD kinds is not supported");
}

AttrSet closure_unchecked(AttrSet x, const OfdSet& sigma) {
  // Dependencies fire only when their antecedent lies inside X itself:
  // the axioms have no transitivity, so newly added attributes never enable more.
  AttrSet out = x;
  for (const auto& psi : sigma)
    if ((psi.lhs & ~x) == 0) out |= psi.rhs;
  return out;
}

}  // namespace

std::string format_ofd(const Ofd& phi, const std::vector<std::string>& schema) {
  std::string out = join_attrs(phi.lhs, schema);
  out += out.empty() ? "-> " : " -> ";
  out += join_attrs(phi.rhs, schema);
  out += ' ';
  out += kind_name(phi.kind);
  if (phi.kind == OfdKind::Inheritance) out += ":" + std::to_string(phi.theta);
  if (phi.support < 1.0) {
    std::ostringstream ss;
    ss << " support=" << phi.support;
    out += ss.str();
  }
  return out;
}

Ofd parse_ofd(std::string_view line, const std::vector<std::string>& schema) {
  auto arrow = line.find("->");
  if (arrow == std::string_view::npos) throw InputError("missing '->' in '" + std::string(line) + "'");
  Ofd phi;
  phi.lhs = parse_attrs(line.substr(0, arrow), schema, line);
  std::istringstream rest{std::string(line.substr(arrow + 2))};
  std::string tok;
  bool have_rhs = false;
  while (rest >> tok) {
    if (!have_rhs) {
      phi.rhs = parse_attrs(tok, schema, line);
      have_rhs = true;
    } else if (tok == "syn") {
      phi.kind = OfdKind::Synonym;
    } else if (tok == "fd") {
      phi.kind = OfdKind::Traditional;
    } else if (tok.rfind("inh", 0) == 0) {
      phi.kind = OfdKind::Inheritance;
      if (tok.size() > 3) {
        if (tok[3] != ':') throw InputError("bad kind '" + tok + "'");
        auto num = tok.substr(4);
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), phi.theta);
        if (ec != std::errc() || p != num.data() + num.size()) throw InputError("bad theta in '" + tok + "'");
      }
    } else if (tok.rfind("support=", 0) == 0) {
      try {
        std::size_t used = 0;
        phi.support = std::stod(tok.substr(8), &used);
        if (used != tok.size() - 8) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw InputError("bad support in '" + tok + "'");
      }
      if (!(phi.support > 0.0 && phi.support <= 1.0)) throw InputError("support must be in (0,1]");
    } else {
      throw InputError("unexpected token '" + tok + "' in '" + std::string(line) + "'");
    }
  }
  if (!have_rhs || phi.rhs == 0) throw InputError("missing consequent in '" + std::string(line) + "'");
  return phi;
}

OfdSet read_ofds(std::istream& in, const std::vector<std::string>& schema) {
  OfdSet out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(parse_ofd(t, schema));
  }
  return dedupe(out);
}

OfdSet load_ofds(const std::string& path, const std::vector<std::string>& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_ofds(in, schema);
}

void write_ofds(std::ostream& out, const OfdSet& sigma, const std::vector<std::string>& schema) {
  for (const auto& phi : sigma) out << format_ofd(phi, schema) << '\n';
}

AttrSet closure(AttrSet x, const OfdSet& sigma) {
  check_uniform(sigma, nullptr);
  return closure_unchecked(x, sigma);
}

bool implies(const OfdSet& sigma, const Ofd& phi) {
  check_uniform(sigma, &phi);
  return (phi.rhs & ~closure_unchecked(phi.lhs, sigma)) == 0;
}

OfdSet minimal_cover(const OfdSet& sigma) {
  std::vector<OfdKind> kinds;
  for (const auto& phi : sigma)
    if (std::find(kinds.begin(), kinds.end(), phi.kind) == kinds.end()) kinds.push_back(phi.kind);
  OfdSet result;
  for (auto kind : kinds) {
    OfdSet group;
    for (const auto& phi : sigma)
      if (phi.kind == kind) group.push_back(phi);
    OfdSet cur;
    for (const auto& phi : decompose(group))
      if ((phi.rhs & phi.lhs) == 0) cur.push_back(phi);
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (auto b : attr_members(cur[i].lhs)) {
        AttrSet reduced = cur[i].lhs & ~attr_bit(b);
        if ((cur[i].rhs & ~closure_unchecked(reduced, cur)) == 0) cur[i].lhs = reduced;
      }
    cur = dedupe(cur);
    for (std::size_t i = 0; i < cur.size();) {
      OfdSet rest;
      for (std::size_t j = 0; j < cur.size(); ++j)
        if (j != i) rest.push_back(cur[j]);
      if ((cur[i].rhs & ~closure_unchecked(cur[i].lhs, rest)) == 0)
        cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(i));
      else
        ++i;
    }
    result.insert(result.end(), cur.begin(), cur.end());
  }
  return result;
}

}  // namespace ofd
