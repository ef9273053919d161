#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfstab/graph.hpp"
#include "selfstab/state.hpp"

namespace selfstab {

// What a process sees when evaluating a guard: its own store, the stores and
// identifiers of its neighbors, nothing else.
class View {
 public:
  View(const Graph& g, const Configuration& cfg, VertexIndex v) : g_(&g), cfg_(&cfg), v_(v) {}

  VertexIndex index() const { return v_; }
  ProcessId id() const { return g_->id_of(v_); }
  const VarStore& self() const { return (*cfg_)[v_]; }

  std::span<const VertexIndex> neighbors() const { return g_->adjacent(v_); }
  const VarStore& at(VertexIndex w) const { return (*cfg_)[w]; }
  ProcessId id_of(VertexIndex w) const { return g_->id_of(w); }

  const Graph& graph() const { return *g_; }
  const Configuration& configuration() const { return *cfg_; }

 private:
  const Graph* g_;
  const Configuration* cfg_;
  VertexIndex v_;
};

using Guard = std::function<bool(const View&)>;
using Statement = std::function<void(const View&, StoreWriter&)>;

// <label> <guard> --> <statement>. `reads`/`writes` are declarative metadata
// used for static checks on action tables.
struct Action {
  std::string label;
  Guard guard;
  Statement statement;
  std::vector<VarRef> reads;
  std::vector<VarRef> writes;
};

// Ordered action list; index order is label order (smaller index = higher
// priority).
struct AlgorithmSpec {
  std::string name;
  std::shared_ptr<const Schema> schema;
  std::vector<Action> actions;

  std::optional<std::size_t> first_enabled(const View& view) const;
  bool enabled(const View& view) const { return first_enabled(view).has_value(); }
  // Variables written by any action.
  std::vector<VarRef> outputs() const;
  std::optional<std::size_t> find(std::string_view label) const;
};

// Applies `actions[index]` of `actions` at view into writer.
void execute(const std::vector<Action>& actions, std::size_t index, const View& view, StoreWriter& writer);

}  // namespace selfstab
