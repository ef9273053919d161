#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "selfstab/graph.hpp"

namespace selfstab {

// A variable slot: an integer or ⊥ (nullopt).
using Value = std::optional<std::int64_t>;
inline constexpr std::nullopt_t bot = std::nullopt;

// 1 + ⊥ = ⊥
inline Value plus_one(Value a) { return a ? Value(*a + 1) : bot; }

// min over a set where ⊥ entries are ignored and min ∅ = ⊥.
inline Value min_value(Value a, Value b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

// Sorted, duplicate-free set of identifiers.
using IdSet = std::vector<ProcessId>;

bool set_contains(const IdSet& s, ProcessId v);
IdSet set_intersection(const IdSet& a, const IdSet& b);

// Array variable contents: key -> non-⊥ value. Absent keys read as ⊥.
class SlotMap {
 public:
  using Entry = std::pair<ProcessId, std::int64_t>;

  Value get(ProcessId key) const;
  void put(ProcessId key, Value v);
  // Appending in strictly increasing key order is O(1).
  void push_back(ProcessId key, std::int64_t v) { entries_.emplace_back(key, v); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  void clear() { entries_.clear(); }

  bool operator==(const SlotMap&) const = default;

 private:
  std::vector<Entry> entries_;
};

struct ScalarVar {
  std::uint16_t index = 0;
  auto operator<=>(const ScalarVar&) const = default;
};
struct SetVar {
  std::uint16_t index = 0;
  auto operator<=>(const SetVar&) const = default;
};
struct ArrayVar {
  std::uint16_t index = 0;
  auto operator<=>(const ArrayVar&) const = default;
};
using VarRef = std::variant<ScalarVar, SetVar, ArrayVar>;

struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool contains(std::int64_t x) const { return lo <= x && x <= hi; }
  bool operator==(const Range&) const = default;
};
inline constexpr Range kIdRange{0, 0xffffffffLL};

enum class VarKind : std::uint8_t { scalar, set, array };

struct VarDecl {
  std::string name;
  VarKind kind = VarKind::scalar;
  Range range = kIdRange;
  bool nullable = true;
  bool id_valued = false;
  std::optional<SetVar> keyed_by;  // arrays only
};

class SchemaError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class VarStore;

// Declares every variable a process holds. Built once per composed algorithm,
// then shared read-only.
class Schema {
 public:
  ScalarVar add_scalar(std::string name, Range range, bool nullable, bool id_valued = false);
  SetVar add_set(std::string name);
  // Unkeyed arrays accept any identifier as a key.
  ArrayVar add_array(std::string name, Range range, bool id_valued, std::optional<SetVar> keyed_by);

  const VarDecl& decl(ScalarVar v) const { return scalars_.at(v.index); }
  const VarDecl& decl(SetVar v) const { return sets_.at(v.index); }
  const VarDecl& decl(ArrayVar v) const { return arrays_.at(v.index); }
  const VarDecl& decl(const VarRef& v) const;
  std::string_view name(const VarRef& v) const { return decl(v).name; }

  std::optional<VarRef> find(std::string_view name) const;
  std::vector<VarRef> all() const;

  std::size_t scalar_count() const { return scalars_.size(); }
  std::size_t set_count() const { return sets_.size(); }
  std::size_t array_count() const { return arrays_.size(); }

  // Store with every nullable slot ⊥ and every other scalar at its range minimum.
  VarStore make_store() const;

 private:
  void check_fresh(const std::string& name) const;

  std::vector<VarDecl> scalars_;
  std::vector<VarDecl> sets_;
  std::vector<VarDecl> arrays_;
};

// State of one process. Plain value type; range and key rules are enforced by
// StoreWriter.
class VarStore {
 public:
  VarStore() = default;
  VarStore(std::size_t scalars, std::size_t sets, std::size_t arrays)
      : scalars_(scalars), sets_(sets), arrays_(arrays) {}

  Value get(ScalarVar v) const { return scalars_[v.index]; }
  const IdSet& get(SetVar v) const { return sets_[v.index]; }
  const SlotMap& get(ArrayVar v) const { return arrays_[v.index]; }
  Value get(ArrayVar v, ProcessId key) const { return arrays_[v.index].get(key); }

  // Scalar that is never ⊥ by declaration (colors, flags, levels).
  std::int64_t num(ScalarVar v) const { return scalars_[v.index].value_or(0); }

  void put(ScalarVar v, Value x) { scalars_[v.index] = x; }
  void put(SetVar v, IdSet s) { sets_[v.index] = std::move(s); }
  void put(ArrayVar v, SlotMap m) { arrays_[v.index] = std::move(m); }

  // Identifier keys held across sets and arrays (memory accounting).
  std::size_t stored_keys() const;

  bool operator==(const VarStore&) const = default;

 private:
  std::vector<Value> scalars_;
  std::vector<IdSet> sets_;
  std::vector<SlotMap> arrays_;
};

// Write access used by action statements. Out-of-range values written to a
// nullable slot become ⊥; a keyed array only keeps keys of its current key set.
class StoreWriter {
 public:
  StoreWriter(const Schema& schema, VarStore& store) : schema_(schema), store_(store) {}

  const VarStore& current() const { return store_; }
  const Schema& schema() const { return schema_; }

  void set(ScalarVar v, Value x);
  void set(SetVar v, IdSet s);
  void set(ArrayVar v, SlotMap m);
  // Rewrites every key of the array's key set with fn(key).
  void assign(ArrayVar v, const std::function<Value(ProcessId)>& fn);

  // Value after the range rule f(a): a if representable, ⊥ otherwise.
  Value fit(ArrayVar v, Value x) const;

 private:
  const Schema& schema_;
  VarStore& store_;
};

struct Configuration {
  std::vector<VarStore> stores;  // indexed by VertexIndex

  VarStore& operator[](VertexIndex i) { return stores[i]; }
  const VarStore& operator[](VertexIndex i) const { return stores[i]; }
  std::size_t size() const { return stores.size(); }
  bool operator==(const Configuration&) const = default;
};

Configuration make_configuration(const Schema& schema, const Graph& g);

}  // namespace selfstab
