#pragma once

#include <vector>

#include "selfstab/algorithm.hpp"
#include "selfstab/state.hpp"

namespace selfstab::bfs {

struct BfsVars {
  ScalarVar root;    // claimed root identifier
  ScalarVar lvl;     // claimed distance to the root, in [0, n]
  ScalarVar parent;  // neighbor identifier or ⊥
};

BfsVars declare(Schema& schema, std::size_t n);

// Silent min-identifier BFS. Every process moves to
//   min_lex( (id, 0, ⊥), min over neighbors u with u.lvl + 1 < n of (u.root, u.lvl + 1, u) ).
// Claims with a level of n or more cannot belong to a real tree and are
// ignored, which flushes fake roots.
struct Layer {
  BfsVars vars;
  std::size_t n = 0;
  std::vector<Action> actions;
};

Layer make_layer(const BfsVars& vars, std::size_t n);

// Standalone algorithm over a schema holding only the BFS variables.
AlgorithmSpec make_algorithm(std::size_t n);

// Par(v): {parent} with ⊥ read as the empty set. Only neighbor indices count.
std::vector<VertexIndex> par(const View& view, const BfsVars& vars);
// Chi(v): neighbors whose parent is v.
std::vector<VertexIndex> chi(const View& view, const BfsVars& vars);

// L_BFS against the graph: unique root = min id, lvl = distance, parent one
// level closer with the smallest identifier.
bool legitimate(const Graph& g, const Configuration& cfg, const BfsVars& vars);

}  // namespace selfstab::bfs
