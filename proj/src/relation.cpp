#include "ofd/relation.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <sstream>

namespace ofd {

int attr_count(AttrSet s) { return std::popcount(s); }

std::vector<AttrId> attr_members(AttrSet s) {
  std::vector<AttrId> out;
  while (s) {
    out.push_back(static_cast<AttrId>(std::countr_zero(s)));
    s &= s - 1;
  }
  return out;
}

std::uint32_t Relation::Column::intern(const std::string& v) {
  auto [it, fresh] = index.try_emplace(v, static_cast<std::uint32_t>(dict.size()));
  if (fresh) dict.push_back(v);
  return it->second;
}

Relation::Relation(std::vector<std::string> schema,
                   const std::vector<std::vector<std::string>>& rows)
    : schema_(std::move(schema)), cols_(schema_.size()), n_(rows.size()) {
  if (schema_.size() > kMaxArity)
    throw InputError("arity " + std::to_string(schema_.size()) + " exceeds the limit of 64");
  for (auto& c : cols_) c.codes.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != schema_.size())
      throw InputError("row " + std::to_string(i) + ": expected " +
                       std::to_string(schema_.size()) + " fields, got " +
                       std::to_string(rows[i].size()));
    for (std::size_t a = 0; a < schema_.size(); ++a)
      cols_[a].codes.push_back(cols_[a].intern(rows[i][a]));
  }
}

AttributeId Relation::attribute(AttrId a) const {
  if (a >= schema_.size()) throw std::out_of_range("attribute index out of range");
  return {a, schema_[a]};
}

std::optional<AttrId> Relation::find(std::string_view name) const {
  for (std::size_t a = 0; a < schema_.size(); ++a)
    if (schema_[a] == name) return a;
  return std::nullopt;
}

AttrId Relation::index_of(std::string_view name) const {
  auto a = find(name);
  if (!a) throw InputError("unknown attribute '" + std::string(name) + "'");
  return *a;
}

const std::string& Relation::value(TupleId t, AttrId a) const {
  return cols_[a].dict[cols_[a].codes[t]];
}

std::optional<std::uint32_t> Relation::code_of(AttrId a, const std::string& v) const {
  auto it = cols_[a].index.find(v);
  if (it == cols_[a].index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Relation::row(TupleId t) const {
  std::vector<std::string> out;
  out.reserve(arity());
  for (std::size_t a = 0; a < arity(); ++a) out.push_back(value(t, a));
  return out;
}

Relation Relation::project(const std::vector<AttrId>& attrs) const {
  std::vector<std::string> schema;
  for (auto a : attrs) schema.push_back(schema_.at(a));
  std::vector<std::vector<std::string>> rows(n_);
  for (TupleId t = 0; t < n_; ++t)
    for (auto a : attrs) rows[t].push_back(value(t, a));
  return Relation(std::move(schema), rows);
}

Relation Relation::subset(const std::vector<TupleId>& ids) const {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ids.size());
  for (auto t : ids) rows.push_back(row(t));
  return Relation(schema_, rows);
}

std::string Relation::set_value(TupleId t, AttrId a, const std::string& v) {
  std::string old = value(t, a);
  cols_[a].codes[t] = cols_[a].intern(v);
  return old;
}

namespace {

std::string trim(std::string s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  std::size_t b = 0, e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<Record> parse_records(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Record> out;
  std::size_t line = 1, i = 0;
  while (i < text.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool quoted = false, any = false;
    for (;;) {
      if (i >= text.size()) {
        if (quoted) throw InputError("line " + std::to_string(rec.line) + ": unterminated quote");
        rec.fields.push_back(trim(field));
        break;
      }
      char c = text[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            quoted = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      if (c == '"') {
        quoted = true;
        any = true;
        ++i;
      } else if (c == ',') {
        rec.fields.push_back(trim(field));
        field.clear();
        any = true;
        ++i;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        ++i;
        ++line;
        rec.fields.push_back(trim(field));
        break;
      } else {
        field += c;
        if (c != ' ' && c != '\t') any = true;
        ++i;
      }
    }
    bool blank = !any && rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

Relation read_csv(std::istream& in, bool has_header) {
  auto records = parse_records(in);
  if (records.empty()) throw InputError("empty CSV input");
  std::vector<std::string> schema;
  std::size_t first = 0;
  if (has_header) {
    schema = records[0].fields;
    first = 1;
    if (records.size() == 1) throw InputError("CSV has a header but no rows");
  } else {
    for (std::size_t a = 0; a < records[0].fields.size(); ++a)
      schema.push_back("col" + std::to_string(a));
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size() - first);
  for (std::size_t i = first; i < records.size(); ++i) {
    if (records[i].fields.size() != schema.size())
      throw InputError("line " + std::to_string(records[i].line) + ": expected " +
                       std::to_string(schema.size()) + " fields, got " +
                       std::to_string(records[i].fields.size()));
    rows.push_back(std::move(records[i].fields));
  }
  return Relation(std::move(schema), rows);
}

Relation load_csv(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, has_header);
}

namespace {
std::string csv_escape(const std::string& v) {
  bool needs = v.find_first_of(",\"\n\r") != std::string::npos ||
               (!v.empty() && (v.front() == ' ' || v.back() == ' '));
  if (!needs) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

void write_csv(std::ostream& out, const Relation& r) {
  for (std::size_t a = 0; a < r.arity(); ++a)
    out << (a ? "," : "") << csv_escape(r.schema()[a]);
  out << '\n';
  for (TupleId t = 0; t < r.size(); ++t) {
    for (std::size_t a = 0; a < r.arity(); ++a)
      out << (a ? "," : "") << csv_escape(r.value(t, a));
    out << '\n';
  }
}

void save_csv(const std::string& path, const Relation& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out, r);
}

UpdateResult apply_cell_updates(const Relation& r, const std::vector<CellUpdate>& updates) {
  std::map<std::pair<TupleId, AttrId>, const std::string*> seen;
  for (const auto& u : updates) {
    if (u.tuple >= r.size() || u.attr >= r.arity())
      throw InputError("cell update out of range");
    auto [it, fresh] = seen.try_emplace({u.tuple, u.attr}, &u.value);
    if (!fresh && *it->second != u.value)
      throw InputError("conflicting updates for tuple " + std::to_string(u.tuple) +
                       ", attribute " + r.schema()[u.attr]);
  }
  UpdateResult res{r, 0};
  for (const auto& [cell, v] : seen) {
    if (r.value(cell.first, cell.second) != *v) ++res.dist;
    res.relation.set_value(cell.first, cell.second, *v);
  }
  return res;
}

std::size_t cell_distance(const Relation& a, const Relation& b) {
  if (a.size() != b.size() || a.arity() != b.arity())
    throw std::invalid_argument("cell_distance: relations differ in shape");
  std::size_t d = 0;
  for (TupleId t = 0; t < a.size(); ++t)
    for (std::size_t c = 0; c < a.arity(); ++c)
      if (a.value(t, c) != b.value(t, c)) ++d;
  return d;
}

std::size_t StrippedPartition::covered() const {
  std::size_t s = 0;
  for (const auto& c : classes) s += c.size();
  return s;
}

Partition partition_single(const Relation& r, AttrId a) {
  Partition p{attr_bit(a), r.size(), {}};
  std::vector<std::int64_t> slot(r.dictionary(a).size(), -1);
  const auto& codes = r.codes(a);
  for (TupleId t = 0; t < r.size(); ++t) {
    auto& s = slot[codes[t]];
    if (s < 0) {
      s = static_cast<std::int64_t>(p.classes.size());
      p.classes.emplace_back();
    }
    p.classes[s].push_back(t);
  }
  return p;
}

Partition partition_product(const Partition& a, const Partition& b) {
  Partition out{a.attrs | b.attrs, a.n, {}};
  std::vector<std::uint32_t> owner(a.n);
  for (std::uint32_t i = 0; i < a.classes.size(); ++i)
    for (auto t : a.classes[i]) owner[t] = i;
  std::vector<std::int64_t> slot(a.classes.size(), -1);
  std::vector<std::pair<TupleId, EqClass>> pieces;
  for (const auto& cb : b.classes) {
    std::vector<std::uint32_t> touched;
    std::vector<EqClass> local;
    for (auto t : cb) {
      auto& s = slot[owner[t]];
      if (s < 0) {
        s = static_cast<std::int64_t>(local.size());
        local.emplace_back();
        touched.push_back(owner[t]);
      }
      local[s].push_back(t);
    }
    for (auto o : touched) slot[o] = -1;
    for (auto& c : local) pieces.emplace_back(c.front(), std::move(c));
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& [_, c] : pieces) out.classes.push_back(std::move(c));
  return out;
}

Partition partition_of(const Relation& r, AttrSet attrs) {
  if (attrs == 0) {
    Partition p{0, r.size(), {}};
    if (r.size()) {
      p.classes.emplace_back(r.size());
      for (TupleId t = 0; t < r.size(); ++t) p.classes[0][t] = t;
    }
    return p;
  }
  auto members = attr_members(attrs);
  Partition p = partition_single(r, members[0]);
  for (std::size_t i = 1; i < members.size(); ++i)
    p = partition_product(p, partition_single(r, members[i]));
  return p;
}

StrippedPartition strip(const Partition& p) {
  StrippedPartition s{p.attrs, p.n, {}};
  for (const auto& c : p.classes)
    if (c.size() > 1) s.classes.push_back(c);
  return s;
}

StrippedPartition stripped_single(const Relation& r, AttrId a) {
  return strip(partition_single(r, a));
}

StrippedPartition stripped_of(const Relation& r, AttrSet attrs) {
  return strip(partition_of(r, attrs));
}

StrippedPartition partition_product(const StrippedPartition& a, const StrippedPartition& b) {
  // Probe-table product: tuples outside a's classes are singletons and drop out.
  StrippedPartition out{a.attrs | b.attrs, a.n, {}};
  std::vector<std::int32_t> owner(a.n, -1);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(a.classes.size()); ++i)
    for (auto t : a.classes[i]) owner[t] = i;
  std::vector<std::int32_t> slot(a.classes.size(), -1);
  std::vector<EqClass> local;
  std::vector<std::int32_t> touched;
  for (const auto& cb : b.classes) {
    local.clear();
    touched.clear();
    for (auto t : cb) {
      auto o = owner[t];
      if (o < 0) continue;
      if (slot[o] < 0) {
        slot[o] = static_cast<std::int32_t>(local.size());
        local.emplace_back();
        touched.push_back(o);
      }
      local[slot[o]].push_back(t);
    }
    for (auto o : touched) slot[o] = -1;
    for (auto& c : local)
      if (c.size() > 1) out.classes.push_back(std::move(c));
  }
  std::sort(out.classes.begin(), out.classes.end(),
            [](const EqClass& x, const EqClass& y) { return x.front() < y.front(); });
  return out;
}

}  // namespace ofd
