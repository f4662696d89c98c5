#include "ofd/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ofd/relation.hpp"

namespace ofd {

void OntologyDelta::merge(const OntologyDelta& other) {
  insertions.insert(insertions.end(), other.insertions.begin(), other.insertions.end());
}

SenseId Ontology::add_sense(const std::string& name) {
  auto it = sense_index_.find(name);
  if (it != sense_index_.end()) return it->second;
  auto id = static_cast<SenseId>(senses_.size());
  senses_.push_back({id, name});
  sense_index_.emplace(name, id);
  return id;
}

ClassId Ontology::add_class(const std::string& name, std::optional<ClassId> parent,
                            const std::vector<SenseId>& senses,
                            const std::vector<std::string>& synonyms) {
  if (class_index_.count(name)) throw InputError("duplicate class id '" + name + "'");
  if (parent && *parent >= classes_.size()) throw InputError("unknown parent for '" + name + "'");
  auto id = static_cast<ClassId>(classes_.size());
  classes_.push_back({id, name, parent, senses, {}});
  class_index_.emplace(name, id);
  children_.emplace_back();
  members_.emplace_back();
  depth_.push_back(parent ? depth_[*parent] + 1 : 0);
  if (parent) children_[*parent].push_back(id);
  for (const auto& v : synonyms)
    for (auto s : senses) add_member(id, v, s);
  return id;
}

void Ontology::add_member(ClassId c, const std::string& v, SenseId s) {
  if (c >= classes_.size()) throw InputError("unknown class");
  if (s >= senses_.size()) throw InputError("unknown sense");
  auto& m = members_[c];
  auto it = m.find(v);
  if (it == m.end()) {
    classes_[c].synonyms.push_back(v);
    it = m.emplace(v, std::vector<SenseId>{}).first;
  }
  if (std::find(it->second.begin(), it->second.end(), s) != it->second.end()) return;
  it->second.push_back(s);
  auto& idx = value_index_[v];
  Membership mem{c, s};
  idx.insert(std::lower_bound(idx.begin(), idx.end(), mem), mem);
}

void Ontology::set_parent(ClassId c, ClassId p) {
  classes_[c].parent = p;
  children_[p].push_back(c);
}

void Ontology::recompute_depths() {
  std::vector<int> state(classes_.size(), 0);
  for (ClassId c = 0; c < classes_.size(); ++c) {
    std::vector<ClassId> chain;
    ClassId cur = c;
    while (state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      if (!classes_[cur].parent) break;
      cur = *classes_[cur].parent;
      if (state[cur] == 1) throw InputError("is-a cycle through class '" + classes_[cur].name + "'");
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      auto p = classes_[*it].parent;
      depth_[*it] = p ? depth_[*p] + 1 : 0;
      state[*it] = 2;
    }
  }
}

const ConceptClass& Ontology::concept_class(ClassId c) const {
  if (c >= classes_.size()) throw std::out_of_range("unknown class id " + std::to_string(c));
  return classes_[c];
}

const Sense& Ontology::sense(SenseId s) const {
  if (s >= senses_.size()) throw std::out_of_range("unknown sense id " + std::to_string(s));
  return senses_[s];
}

std::string Ontology::sense_name(SenseId s) const {
  return s == kLiteralSense ? std::string("literal") : sense(s).name;
}

std::optional<ClassId> Ontology::find_class(const std::string& name) const {
  auto it = class_index_.find(name);
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SenseId> Ontology::find_sense(const std::string& name) const {
  auto it = sense_index_.find(name);
  if (it == sense_index_.end()) return std::nullopt;
  return it->second;
}

ClassId Ontology::class_id(const std::string& name) const {
  auto c = find_class(name);
  if (!c) throw InputError("unknown class '" + name + "'");
  return *c;
}

SenseId Ontology::sense_id(const std::string& name) const {
  if (name == "literal") return kLiteralSense;
  auto s = find_sense(name);
  if (!s) throw InputError("unknown sense '" + name + "'");
  return *s;
}

std::set<ClassId> Ontology::names(const std::string& v) const {
  std::set<ClassId> out;
  for (const auto& m : memberships(v)) out.insert(m.cls);
  return out;
}

const std::vector<Membership>& Ontology::memberships(const std::string& v) const {
  static const std::vector<Membership> kNone;
  auto it = value_index_.find(v);
  return it == value_index_.end() ? kNone : it->second;
}

bool Ontology::contains(const std::string& v) const { return value_index_.count(v) > 0; }

bool Ontology::contains(const std::string& v, SenseId s) const {
  for (const auto& m : memberships(v))
    if (m.sense == s) return true;
  return false;
}

std::vector<ClassId> Ontology::classes_of(const std::string& v, SenseId s) const {
  std::vector<ClassId> out;
  for (const auto& m : memberships(v))
    if (m.sense == s) out.push_back(m.cls);
  return out;
}

std::vector<SenseId> Ontology::senses_of(const std::string& v) const {
  std::vector<SenseId> out;
  for (const auto& m : memberships(v)) out.push_back(m.sense);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Ontology::member(ClassId c, const std::string& v, SenseId s) const {
  if (c >= classes_.size()) return false;
  auto it = members_[c].find(v);
  if (it == members_[c].end()) return false;
  return std::find(it->second.begin(), it->second.end(), s) != it->second.end();
}

std::set<std::string> Ontology::synonyms(ClassId c) const {
  const auto& cc = concept_class(c);
  return {cc.synonyms.begin(), cc.synonyms.end()};
}

std::vector<std::string> Ontology::synonyms(ClassId c, SenseId s) const {
  std::vector<std::string> out;
  for (const auto& v : concept_class(c).synonyms)
    if (member(c, v, s)) out.push_back(v);
  return out;
}

std::set<std::string> Ontology::descendants(ClassId c) const {
  std::set<std::string> out;
  std::vector<ClassId> stack{c};
  concept_class(c);
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    out.insert(classes_[cur].synonyms.begin(), classes_[cur].synonyms.end());
    for (auto ch : children_[cur]) stack.push_back(ch);
  }
  return out;
}

const std::vector<ClassId>& Ontology::children(ClassId c) const {
  concept_class(c);
  return children_[c];
}

std::optional<std::size_t> Ontology::ancestor_distance(ClassId desc, ClassId anc) const {
  if (desc >= classes_.size() || anc >= classes_.size()) return std::nullopt;
  if (depth_[desc] < depth_[anc]) return std::nullopt;
  std::size_t d = depth_[desc] - depth_[anc];
  ClassId cur = desc;
  for (std::size_t i = 0; i < d; ++i) cur = *classes_[cur].parent;
  if (cur != anc) return std::nullopt;
  return d;
}

const std::string& Ontology::canonical(ClassId c, SenseId s) const {
  const auto& cc = concept_class(c);
  if (s != kLiteralSense)
    for (const auto& v : cc.synonyms)
      if (member(c, v, s)) return v;
  return cc.synonyms.front();
}

std::string Ontology::canonical_value(const std::string& v, SenseId s) const {
  if (s == kLiteralSense) return v;
  for (const auto& m : memberships(v))
    if (m.sense == s) return canonical(m.cls, s);
  return v;
}

bool Ontology::synonymous(const std::string& a, const std::string& b, SenseId s) const {
  if (a == b) return true;
  if (s == kLiteralSense) return false;
  const auto& ma = memberships(a);
  const auto& mb = memberships(b);
  for (const auto& x : ma) {
    if (x.sense != s) continue;
    for (const auto& y : mb)
      if (y.sense == s && y.cls == x.cls) return true;
  }
  return false;
}

LcaOutcome Ontology::lca_distance(const std::vector<std::string>& raw, std::uint32_t theta) const {
  std::vector<std::string> values(raw);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty()) return LcaOutcome::Within;
  for (const auto& v : values)
    if (!contains(v)) return LcaOutcome::NoCommonAncestor;

  bool any_common = false;
  for (SenseId s = 0; s < senses_.size(); ++s) {
    std::vector<std::vector<ClassId>> per_value;
    bool covered = true;
    for (const auto& v : values) {
      per_value.push_back(classes_of(v, s));
      if (per_value.back().empty()) {
        covered = false;
        break;
      }
    }
    if (!covered) continue;
    // Candidate ancestors are the ancestors-or-self of the first value's classes.
    std::set<ClassId> candidates;
    for (auto c : per_value[0])
      for (std::optional<ClassId> cur = c; cur; cur = classes_[*cur].parent) candidates.insert(*cur);
    for (auto anc : candidates) {
      std::size_t worst = 0;
      bool reach = true;
      for (const auto& cls : per_value) {
        std::optional<std::size_t> best;
        for (auto c : cls) {
          auto d = ancestor_distance(c, anc);
          if (d && (!best || *d < *best)) best = d;
        }
        if (!best) {
          reach = false;
          break;
        }
        worst = std::max(worst, *best);
      }
      if (!reach) continue;
      any_common = true;
      if (worst <= theta) return LcaOutcome::Within;
    }
  }
  return any_common ? LcaOutcome::Exceeds : LcaOutcome::NoCommonAncestor;
}

OntologyDelta Ontology::add_value(const std::string& v, SenseId s, ClassId target) {
  concept_class(target);
  sense(s);
  if (member(target, v, s)) return {};
  add_member(target, v, s);
  return OntologyDelta{{Insertion{v, s, target}}};
}

OntologyDelta Ontology::apply(const std::vector<Insertion>& insertions) {
  OntologyDelta d;
  for (const auto& ins : insertions) d.merge(add_value(ins.value, ins.sense, ins.target));
  return d;
}

std::vector<std::string> Ontology::values() const {
  std::vector<std::string> out;
  out.reserve(value_index_.size());
  for (const auto& [v, _] : value_index_) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Ontology::values(SenseId s) const {
  std::vector<std::string> out;
  for (const auto& [v, ms] : value_index_)
    for (const auto& m : ms)
      if (m.sense == s) {
        out.push_back(v);
        break;
      }
  std::sort(out.begin(), out.end());
  return out;
}

using nlohmann::json;

Ontology parse_ontology(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("ontology: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("ontology: top level must be an object");
  Ontology o;
  if (doc.contains("senses"))
    for (const auto& s : doc.at("senses")) o.add_sense(s.get<std::string>());
  const json classes = doc.value("classes", json::array());
  if (!classes.is_array()) throw InputError("ontology: 'classes' must be an array");

  std::vector<std::optional<std::string>> parents;
  for (const auto& c : classes) {
    if (!c.contains("id")) throw InputError("ontology: class without id");
    auto id = c.at("id").get<std::string>();
    std::vector<SenseId> senses;
    for (const auto& s : c.value("senses", json::array())) senses.push_back(o.add_sense(s.get<std::string>()));
    if (senses.empty()) senses.push_back(o.add_sense("default"));
    const auto syns = c.value("synonyms", json::array());
    if (syns.empty()) throw InputError("ontology: class '" + id + "' has an empty synonym set");
    auto cid = o.add_class(id, std::nullopt, senses, {});
    for (const auto& entry : syns) {
      if (entry.is_string()) {
        for (auto s : senses) o.add_member(cid, entry.get<std::string>(), s);
      } else if (entry.is_object()) {
        auto v = entry.at("value").get<std::string>();
        auto own = entry.value("senses", json::array());
        if (own.empty()) {
          for (auto s : senses) o.add_member(cid, v, s);
        } else {
          for (const auto& s : own) o.add_member(cid, v, o.add_sense(s.get<std::string>()));
        }
      } else {
        throw InputError("ontology: bad synonym entry in class '" + id + "'");
      }
    }
    if (c.contains("parent") && !c.at("parent").is_null())
      parents.push_back(c.at("parent").get<std::string>());
    else
      parents.push_back(std::nullopt);
  }
  for (ClassId c = 0; c < parents.size(); ++c) {
    if (!parents[c]) continue;
    auto p = o.find_class(*parents[c]);
    if (!p) throw InputError("ontology: class '" + o.classes_[c].name + "' has dangling parent '" + *parents[c] + "'");
    if (*p == c) throw InputError("ontology: class '" + o.classes_[c].name + "' is its own parent");
    o.set_parent(c, *p);
  }
  o.recompute_depths();
  return o;
}

Ontology load_ontology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ontology(ss.str());
}

std::string ontology_to_json(const Ontology& o) {
  json doc;
  doc["senses"] = json::array();
  for (SenseId s = 0; s < o.sense_count(); ++s) doc["senses"].push_back(o.sense(s).name);
  doc["classes"] = json::array();
  for (ClassId c = 0; c < o.class_count(); ++c) {
    const auto& cc = o.concept_class(c);
    json jc;
    jc["id"] = cc.name;
    jc["parent"] = cc.parent ? json(o.concept_class(*cc.parent).name) : json(nullptr);
    jc["senses"] = json::array();
    for (auto s : cc.senses) jc["senses"].push_back(o.sense(s).name);
    jc["synonyms"] = json::array();
    for (const auto& v : cc.synonyms) {
      std::vector<SenseId> own;
      for (SenseId s = 0; s < o.sense_count(); ++s)
        if (o.member(c, v, s)) own.push_back(s);
      std::vector<SenseId> tags(cc.senses);
      std::sort(tags.begin(), tags.end());
      if (own == tags) {
        jc["synonyms"].push_back(v);
      } else {
        json e;
        e["value"] = v;
        e["senses"] = json::array();
        for (auto s : own) e["senses"].push_back(o.sense(s).name);
        jc["synonyms"].push_back(e);
      }
    }
    doc["classes"].push_back(jc);
  }
  return doc.dump(2) + "\n";
}

void save_ontology(const std::string& path, const Ontology& o) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << ontology_to_json(o);
}

}  // namespace ofd
