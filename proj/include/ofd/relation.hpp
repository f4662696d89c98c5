#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ofd {

// Raised for malformed user input (CSV, ontology JSON, OFD text).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TupleId = std::uint32_t;
using AttrId = std::size_t;
using AttrSet = std::uint64_t;

inline constexpr std::size_t kMaxArity = 64;

constexpr AttrSet attr_bit(AttrId a) { return AttrSet{1} << a; }
constexpr bool has_attr(AttrSet s, AttrId a) { return (s >> a) & 1U; }
int attr_count(AttrSet s);
std::vector<AttrId> attr_members(AttrSet s);

struct AttributeId {
  AttrId index = 0;
  std::string name;
};

// Column-major, dictionary-encoded relation. Codes are dense per column and
// assigned in first-appearance order.
class Relation {
 public:
  Relation() = default;
  Relation(std::vector<std::string> schema,
           const std::vector<std::vector<std::string>>& rows);

  std::size_t size() const { return n_; }
  std::size_t arity() const { return schema_.size(); }
  const std::vector<std::string>& schema() const { return schema_; }
  AttributeId attribute(AttrId a) const;
  AttrId index_of(std::string_view name) const;
  std::optional<AttrId> find(std::string_view name) const;

  const std::string& value(TupleId t, AttrId a) const;
  std::uint32_t code(TupleId t, AttrId a) const { return cols_[a].codes[t]; }
  const std::vector<std::uint32_t>& codes(AttrId a) const { return cols_[a].codes; }
  const std::vector<std::string>& dictionary(AttrId a) const { return cols_[a].dict; }
  std::optional<std::uint32_t> code_of(AttrId a, const std::string& v) const;
  std::vector<std::string> row(TupleId t) const;

  Relation project(const std::vector<AttrId>& attrs) const;
  Relation subset(const std::vector<TupleId>& ids) const;

  // Returns the previous value.
  std::string set_value(TupleId t, AttrId a, const std::string& v);

 private:
  struct Column {
    std::vector<std::string> dict;
    std::unordered_map<std::string, std::uint32_t> index;
    std::vector<std::uint32_t> codes;
    std::uint32_t intern(const std::string& v);
  };
  std::vector<std::string> schema_;
  std::vector<Column> cols_;
  std::size_t n_ = 0;
};

Relation read_csv(std::istream& in, bool has_header = true);
Relation load_csv(const std::string& path, bool has_header = true);
void write_csv(std::ostream& out, const Relation& r);
void save_csv(const std::string& path, const Relation& r);

struct CellUpdate {
  TupleId tuple = 0;
  AttrId attr = 0;
  std::string value;
};

struct UpdateResult {
  Relation relation;
  std::size_t dist = 0;
};

// dist counts cells of the result that differ from the input.
UpdateResult apply_cell_updates(const Relation& r, const std::vector<CellUpdate>& updates);

// Number of differing cells between two relations of the same shape.
std::size_t cell_distance(const Relation& a, const Relation& b);

using EqClass = std::vector<TupleId>;

// Classes are sorted internally and ordered by their smallest tuple id.
struct Partition {
  AttrSet attrs = 0;
  std::size_t n = 0;
  std::vector<EqClass> classes;
};

struct StrippedPartition {
  AttrSet attrs = 0;
  std::size_t n = 0;
  std::vector<EqClass> classes;
  bool superkey() const { return classes.empty(); }
  std::size_t covered() const;
};

Partition partition_single(const Relation& r, AttrId a);
Partition partition_of(const Relation& r, AttrSet attrs);
Partition partition_product(const Partition& a, const Partition& b);
StrippedPartition strip(const Partition& p);
StrippedPartition stripped_single(const Relation& r, AttrId a);
StrippedPartition stripped_of(const Relation& r, AttrSet attrs);
StrippedPartition partition_product(const StrippedPartition& a, const StrippedPartition& b);

}  // namespace ofd
