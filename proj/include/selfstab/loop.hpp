#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "selfstab/algorithm.hpp"
#include "selfstab/bfs.hpp"
#include "selfstab/state.hpp"

namespace selfstab::loop {

class CompositionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum Mode : std::int64_t { kModeA = 0, kModeP = 1 };

struct LoopVars {
  ScalarVar cl;    // color in [0, 4]
  ScalarVar mode;  // kModeA or kModeP
  ScalarVar rst;   // reset flag in [0, 1]
};

LoopVars declare(Schema& schema);

// Output variable x of A paired with its copying variable in-x.
struct CopyPair {
  VarRef out;
  VarRef copy;
};

// The three pluggable parts of Loop(A, E, P), all over one shared schema.
struct BaseAlgorithmBinding {
  std::vector<Action> A;
  std::vector<Action> P;
  std::function<bool(const View&)> E;
  std::vector<VarRef> E_reads;
  std::vector<CopyPair> copies;
};

// Composed algorithm plus the handles needed to inspect its configurations.
struct Composition {
  AlgorithmSpec spec;
  std::shared_ptr<const Schema> schema;
  bfs::BfsVars bfs;
  LoopVars vars;
  BaseAlgorithmBinding binding;
  AlgorithmSpec A;  // base algorithm alone, over the same schema
  AlgorithmSpec P;
};

// Emits actions L1..L16. Throws CompositionError on a malformed binding.
Composition compose(std::shared_ptr<const Schema> schema, const bfs::Layer& bfs_layer, const LoopVars& vars,
                    BaseAlgorithmBinding binding);

bool illegal_pair(std::int64_t parent_cl, std::int64_t child_cl);
bool down_ok(const View& view, const bfs::BfsVars& bfs, const LoopVars& vars);
bool up_ok(const View& view, const bfs::BfsVars& bfs, const LoopVars& vars);

// Writes every copying variable with the value of its output variable.
Configuration copy_shift(const Configuration& cfg, const Schema& schema, const std::vector<CopyPair>& copies);
// True when in-x = x for every pair at store s.
bool copies_agree(const VarStore& s, const std::vector<CopyPair>& copies);

bool any_error(const Graph& g, const Configuration& cfg, const Composition& c);
bool check_Cgoal(const Graph& g, const Configuration& cfg, const Composition& c);
bool check_Cfin(const Graph& g, const Configuration& cfg, const Composition& c);

}  // namespace selfstab::loop
