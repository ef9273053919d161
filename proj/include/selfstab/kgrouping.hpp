#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "selfstab/algorithm.hpp"
#include "selfstab/bfs.hpp"
#include "selfstab/loop.hpp"
#include "selfstab/state.hpp"

namespace selfstab::kgrouping {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GroupVars {
  SetVar domain;
  ScalarVar height, initGroup, group;
  ArrayVar dist, groupD, mergeD, stampD;
  ArrayVar border, far, target, stamp1, stamp2, groups;
  ArrayVar merging, stampON, prior;
  // copying variables
  ScalarVar in_group;
  ArrayVar in_groups, in_groupD, in_stampON, in_prior, in_stamp1, in_stamp2, in_stampD;
};

GroupVars declare(Schema& schema, int k);

// The eight (x, in-x) pairs shifted by the copy wave.
std::vector<loop::CopyPair> copy_pairs(const GroupVars& g);

// Boolean array slot; ⊥ reads as false.
inline bool flag(Value x) { return x.value_or(0) != 0; }

// Share(v, u, x, f'(v)): f'(v) if u = v, otherwise the minimum of w.x[u] over
// neighbors w one hop closer to u according to dist.
Value share(const View& view, const GroupVars& g, ProcessId u, ArrayVar x, Value own);

// Min(v, x[key], Q(v)) relayed through same-group neighbors along in-groupD.
Value min_macro(const View& view, const GroupVars& g, ArrayVar x, ProcessId key, bool q);

// Distance(v, u, x, X) = 0 if u = v, else 1 + min over w in X of w.x[u].
Value distance_macro(const View& view, ProcessId u, ArrayVar x, std::span<const VertexIndex> X);

// Dist(v, u) and Domain(v).
Value dist_fn(const View& view, const GroupVars& g, ProcessId u);
IdSet domain_fn(const View& view, const GroupVars& g, int k);
std::int64_t height_fn(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k);
ProcessId init_group_fn(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k);

std::vector<Action> init_actions(const bfs::BfsVars& b, const GroupVars& g, int k);
std::vector<Action> merge_actions(const GroupVars& g, int k);

// E(v): true iff some conjunct of the error table fails at v.
bool eval_E(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k);

// Target(v) and Merging(v), exposed for inspection.
Value target_fn(const View& view, const GroupVars& g);
bool merging_fn(const View& view, const GroupVars& g);

// Loop(Merge, E, Init) over one schema.
struct Instance {
  int k = 0;
  std::size_t n = 0;
  std::shared_ptr<const Schema> schema;
  GroupVars vars;
  loop::Composition loop;

  const AlgorithmSpec& spec() const { return loop.spec; }
  const bfs::BfsVars& bfs() const { return loop.bfs; }
  const loop::LoopVars& colors() const { return loop.vars; }
};

// Throws ParameterError when k < 1.
Instance make_instance(const Graph& g, int k);

}  // namespace selfstab::kgrouping
