#include "selfstab/state.hpp"

#include <algorithm>

namespace selfstab {

bool set_contains(const IdSet& s, ProcessId v) { return std::binary_search(s.begin(), s.end(), v); }

IdSet set_intersection(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Value SlotMap::get(ProcessId key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, ProcessId k) { return e.first < k; });
  if (it == entries_.end() || it->first != key) return bot;
  return it->second;
}

void SlotMap::put(ProcessId key, Value v) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, ProcessId k) { return e.first < k; });
  const bool present = it != entries_.end() && it->first == key;
  if (!v) {
    if (present) entries_.erase(it);
  } else if (present) {
    it->second = *v;
  } else {
    entries_.insert(it, {key, *v});
  }
}

void Schema::check_fresh(const std::string& name) const {
  if (find(name)) throw SchemaError("variable '" + name + "' declared twice");
}

ScalarVar Schema::add_scalar(std::string name, Range range, bool nullable, bool id_valued) {
  check_fresh(name);
  scalars_.push_back({std::move(name), VarKind::scalar, range, nullable, id_valued, std::nullopt});
  return ScalarVar{static_cast<std::uint16_t>(scalars_.size() - 1)};
}

SetVar Schema::add_set(std::string name) {
  check_fresh(name);
  sets_.push_back({std::move(name), VarKind::set, kIdRange, false, true, std::nullopt});
  return SetVar{static_cast<std::uint16_t>(sets_.size() - 1)};
}

ArrayVar Schema::add_array(std::string name, Range range, bool id_valued, std::optional<SetVar> keyed_by) {
  check_fresh(name);
  if (keyed_by && keyed_by->index >= sets_.size()) throw SchemaError("array keyed by an undeclared set");
  arrays_.push_back({std::move(name), VarKind::array, range, true, id_valued, keyed_by});
  return ArrayVar{static_cast<std::uint16_t>(arrays_.size() - 1)};
}

const VarDecl& Schema::decl(const VarRef& v) const {
  return std::visit([this](auto x) -> const VarDecl& { return decl(x); }, v);
}

std::optional<VarRef> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < scalars_.size(); ++i)
    if (scalars_[i].name == name) return ScalarVar{static_cast<std::uint16_t>(i)};
  for (std::size_t i = 0; i < sets_.size(); ++i)
    if (sets_[i].name == name) return SetVar{static_cast<std::uint16_t>(i)};
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (arrays_[i].name == name) return ArrayVar{static_cast<std::uint16_t>(i)};
  return std::nullopt;
}

std::vector<VarRef> Schema::all() const {
  std::vector<VarRef> out;
  for (std::size_t i = 0; i < scalars_.size(); ++i) out.push_back(ScalarVar{static_cast<std::uint16_t>(i)});
  for (std::size_t i = 0; i < sets_.size(); ++i) out.push_back(SetVar{static_cast<std::uint16_t>(i)});
  for (std::size_t i = 0; i < arrays_.size(); ++i) out.push_back(ArrayVar{static_cast<std::uint16_t>(i)});
  return out;
}

VarStore Schema::make_store() const {
  VarStore s(scalars_.size(), sets_.size(), arrays_.size());
  for (std::size_t i = 0; i < scalars_.size(); ++i)
    if (!scalars_[i].nullable) s.put(ScalarVar{static_cast<std::uint16_t>(i)}, scalars_[i].range.lo);
  return s;
}

std::size_t VarStore::stored_keys() const {
  std::size_t total = 0;
  for (const auto& s : sets_) total += s.size();
  for (const auto& a : arrays_) total += a.size();
  return total;
}

void StoreWriter::set(ScalarVar v, Value x) {
  const VarDecl& d = schema_.decl(v);
  if (x && !d.range.contains(*x)) {
    if (!d.nullable) throw SchemaError("value out of range for '" + d.name + "'");
    x = bot;
  }
  if (!x && !d.nullable) throw SchemaError("'" + d.name + "' cannot hold ⊥");
  store_.put(v, x);
}

void StoreWriter::set(SetVar v, IdSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  // Entries keyed outside the new key set are dropped.
  for (std::size_t i = 0; i < schema_.array_count(); ++i) {
    const ArrayVar a{static_cast<std::uint16_t>(i)};
    const VarDecl& d = schema_.decl(a);
    if (!d.keyed_by || d.keyed_by->index != v.index) continue;
    const SlotMap& old = store_.get(a);
    SlotMap kept;
    for (const auto& [key, val] : old)
      if (set_contains(s, key)) kept.push_back(key, val);
    if (kept.size() != old.size()) store_.put(a, std::move(kept));
  }
  store_.put(v, std::move(s));
}

Value StoreWriter::fit(ArrayVar v, Value x) const {
  if (x && !schema_.decl(v).range.contains(*x)) return bot;
  return x;
}

void StoreWriter::set(ArrayVar v, SlotMap m) {
  const VarDecl& d = schema_.decl(v);
  SlotMap out;
  for (const auto& [key, val] : m) {
    if (d.keyed_by && !set_contains(store_.get(*d.keyed_by), key)) continue;
    if (!d.range.contains(val)) continue;
    out.push_back(key, val);
  }
  store_.put(v, std::move(out));
}

void StoreWriter::assign(ArrayVar v, const std::function<Value(ProcessId)>& fn) {
  const VarDecl& d = schema_.decl(v);
  if (!d.keyed_by) throw SchemaError("assign() needs a keyed array");
  SlotMap out;
  for (ProcessId key : store_.get(*d.keyed_by))
    if (Value x = fit(v, fn(key))) out.push_back(key, *x);
  store_.put(v, std::move(out));
}

Configuration make_configuration(const Schema& schema, const Graph& g) {
  Configuration c;
  c.stores.assign(g.size(), schema.make_store());
  return c;
}

}  // namespace selfstab
