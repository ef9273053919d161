#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfstab/algorithm.hpp"
#include "selfstab/graph.hpp"
#include "selfstab/rng.hpp"
#include "selfstab/state.hpp"

namespace selfstab {

class DaemonContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DaemonPolicy {
  enum class Kind { synchronous, central, random, scripted };

  Kind kind = Kind::random;
  double p = 0.5;           // selection probability (random)
  std::uint64_t seed = 1;   // random and central
  std::vector<std::vector<ProcessId>> script;  // scripted
  // A process enabled for n consecutive steps without being selected is
  // force-included in the next selection.
  bool fairness_aging = true;

  static DaemonPolicy synchronous() { return {Kind::synchronous, 0.0, 0, {}, true}; }
  static DaemonPolicy central(std::uint64_t seed, bool aging = true) {
    return {Kind::central, 0.0, seed, {}, aging};
  }
  static DaemonPolicy random(double p, std::uint64_t seed, bool aging = true) {
    return {Kind::random, p, seed, {}, aging};
  }
  static DaemonPolicy scripted(std::vector<std::vector<ProcessId>> sets) {
    return {Kind::scripted, 0.0, 0, std::move(sets), false};
  }
};

std::string to_string(DaemonPolicy::Kind kind);
DaemonPolicy::Kind parse_daemon_kind(const std::string& s);

// Stateful selector driven by a DaemonPolicy.
class Daemon {
 public:
  Daemon(const DaemonPolicy& policy, std::size_t n);

  // `enabled` holds vertex indices in increasing order and is non-empty.
  // Returns the selected vertex indices in increasing order.
  std::vector<VertexIndex> select(const Graph& g, const std::vector<VertexIndex>& enabled);

  bool exhausted() const;
  std::size_t window() const { return window_; }

 private:
  DaemonPolicy policy_;
  Rng rng_;
  std::size_t window_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> age_;  // consecutive enabled-but-unselected steps
};

struct StepRecord {
  std::vector<ProcessId> selected;       // increasing id order
  std::vector<std::uint16_t> fired;      // action index per selected process
};

struct ExecutionTrace {
  Configuration initial;
  std::vector<StepRecord> steps;
  // enabled[i] = processes (vertex indices) enabled at configuration i;
  // size is steps.size() + 1 when recorded.
  std::vector<std::vector<VertexIndex>> enabled;
  // Configuration index at which each complete round ends.
  std::vector<std::size_t> round_boundaries;
  std::vector<std::string> labels;  // action labels of the algorithm
  std::vector<ProcessId> vertex_ids;  // id of each vertex index
};

enum class Verdict { terminated, budget_exhausted };
std::string to_string(Verdict v);

// Called after every step with the post-step configuration.
struct StepEvent {
  std::size_t step;  // 0-based index of the step just taken
  const Configuration& after;
  const StepRecord& record;
  const std::vector<VertexIndex>& selected;  // vertex indices of record.selected
  bool round_end;
};
using StepObserver = std::function<void(const StepEvent&)>;

struct RunOptions {
  bool record_steps = true;    // keep StepRecords and per-configuration enabled sets
  StepObserver observer;
};

struct RunResult {
  ExecutionTrace trace;
  Configuration final;
  Verdict verdict = Verdict::terminated;
  std::size_t steps = 0;
  std::size_t rounds = 0;
};

std::vector<std::string> enabled_actions(const AlgorithmSpec& alg, const Graph& g, const Configuration& cfg,
                                         ProcessId v);

// Every selected process applies the statement of its smallest-label enabled
// action; all guards and statements read `cfg` (pre-step snapshot).
Configuration step(const AlgorithmSpec& alg, const Graph& g, const Configuration& cfg,
                   const std::vector<ProcessId>& selected, StepRecord* record = nullptr);

RunResult run(const Graph& g, const Configuration& cfg0, const AlgorithmSpec& alg, const DaemonPolicy& daemon,
              std::size_t max_steps, const RunOptions& options = {});

// Number of complete rounds of a recorded trace.
std::size_t rounds(const ExecutionTrace& trace);

// Tracks round boundaries online: a round ends once every process enabled at
// its start has acted or been neutralized.
class RoundCounter {
 public:
  explicit RoundCounter(std::size_t n) : pending_(n, 0) {}

  void start(const std::vector<VertexIndex>& enabled);
  // Returns true when this step completes the current round.
  bool advance(const std::vector<VertexIndex>& selected, const std::vector<VertexIndex>& enabled_after);
  std::size_t completed() const { return completed_; }

 private:
  std::vector<char> pending_;
  std::size_t remaining_ = 0;
  std::size_t completed_ = 0;
};

std::size_t default_budget(const Graph& g);

}  // namespace selfstab
