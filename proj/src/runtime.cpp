#include "selfstab/runtime.hpp"

#include <algorithm>

namespace selfstab {

std::optional<std::size_t> AlgorithmSpec::first_enabled(const View& view) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].guard(view)) return i;
  return std::nullopt;
}

std::vector<VarRef> AlgorithmSpec::outputs() const {
  std::vector<VarRef> out;
  for (const auto& a : actions)
    for (const auto& w : a.writes)
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  return out;
}

std::optional<std::size_t> AlgorithmSpec::find(std::string_view label) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].label == label) return i;
  return std::nullopt;
}

void execute(const std::vector<Action>& actions, std::size_t index, const View& view, StoreWriter& writer) {
  actions.at(index).statement(view, writer);
}

std::string to_string(DaemonPolicy::Kind kind) {
  switch (kind) {
    case DaemonPolicy::Kind::synchronous: return "synchronous";
    case DaemonPolicy::Kind::central: return "central";
    case DaemonPolicy::Kind::random: return "random";
    case DaemonPolicy::Kind::scripted: return "scripted";
  }
  return "?";
}

DaemonPolicy::Kind parse_daemon_kind(const std::string& s) {
  if (s == "synchronous") return DaemonPolicy::Kind::synchronous;
  if (s == "central") return DaemonPolicy::Kind::central;
  if (s == "random") return DaemonPolicy::Kind::random;
  if (s == "scripted") return DaemonPolicy::Kind::scripted;
  throw std::invalid_argument("unknown daemon kind '" + s + "'");
}

std::string to_string(Verdict v) { return v == Verdict::terminated ? "terminated" : "budget_exhausted"; }

Daemon::Daemon(const DaemonPolicy& policy, std::size_t n)
    : policy_(policy), rng_(policy.seed), window_(n), age_(n, 0) {}

bool Daemon::exhausted() const {
  return policy_.kind == DaemonPolicy::Kind::scripted && cursor_ >= policy_.script.size();
}

std::vector<VertexIndex> Daemon::select(const Graph& g, const std::vector<VertexIndex>& enabled) {
  std::vector<VertexIndex> chosen;
  switch (policy_.kind) {
    case DaemonPolicy::Kind::synchronous:
      chosen = enabled;
      break;
    case DaemonPolicy::Kind::scripted: {
      if (exhausted()) return {};
      for (ProcessId id : policy_.script[cursor_]) chosen.push_back(g.index_of(id));
      ++cursor_;
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      return chosen;
    }
    case DaemonPolicy::Kind::central: {
      VertexIndex pick = enabled[rng_.below(enabled.size())];
      if (policy_.fairness_aging) {
        std::size_t oldest = 0;
        for (VertexIndex v : enabled)
          if (age_[v] >= window_ && age_[v] > oldest) {
            oldest = age_[v];
            pick = v;
          }
      }
      chosen.push_back(pick);
      break;
    }
    case DaemonPolicy::Kind::random: {
      for (VertexIndex v : enabled)
        if (rng_.chance(policy_.p) || (policy_.fairness_aging && age_[v] >= window_)) chosen.push_back(v);
      if (chosen.empty()) chosen.push_back(enabled[rng_.below(enabled.size())]);
      break;
    }
  }
  // Age bookkeeping: disabled processes reset, selected processes reset.
  std::vector<char> on(age_.size(), 0);
  for (VertexIndex v : enabled) on[v] = 1;
  for (VertexIndex v : chosen) on[v] = 2;
  for (std::size_t v = 0; v < age_.size(); ++v) age_[v] = on[v] == 1 ? age_[v] + 1 : 0;
  return chosen;
}

std::vector<std::string> enabled_actions(const AlgorithmSpec& alg, const Graph& g, const Configuration& cfg,
                                         ProcessId v) {
  const View view(g, cfg, g.index_of(v));
  std::vector<std::string> out;
  for (const auto& a : alg.actions)
    if (a.guard(view)) out.push_back(a.label);
  return out;
}

namespace {

// Applies one step for the given vertex indices. Each selected index must have
// an enabled action; `firing[i]` is its smallest enabled action.
Configuration apply(const AlgorithmSpec& alg, const Graph& g, const Configuration& cfg,
                    const std::vector<VertexIndex>& selected, const std::vector<std::size_t>& firing) {
  Configuration next = cfg;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const View view(g, cfg, selected[i]);
    StoreWriter writer(*alg.schema, next[selected[i]]);
    execute(alg.actions, firing[i], view, writer);
  }
  return next;
}

}  // namespace

Configuration step(const AlgorithmSpec& alg, const Graph& g, const Configuration& cfg,
                   const std::vector<ProcessId>& selected, StepRecord* record) {
  std::vector<ProcessId> ids = selected;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<VertexIndex> idx;
  std::vector<std::size_t> firing;
  for (ProcessId id : ids) {
    const VertexIndex v = g.index_of(id);
    auto a = alg.first_enabled(View(g, cfg, v));
    if (!a) throw DaemonContractError("daemon selected process " + std::to_string(id) + " which is not enabled");
    idx.push_back(v);
    firing.push_back(*a);
  }
  if (record) {
    record->selected = ids;
    record->fired.assign(firing.begin(), firing.end());
  }
  return apply(alg, g, cfg, idx, firing);
}

void RoundCounter::start(const std::vector<VertexIndex>& enabled) {
  std::fill(pending_.begin(), pending_.end(), 0);
  for (VertexIndex v : enabled) pending_[v] = 1;
  remaining_ = enabled.size();
}

bool RoundCounter::advance(const std::vector<VertexIndex>& selected, const std::vector<VertexIndex>& enabled_after) {
  if (remaining_ == 0) return false;
  for (VertexIndex v : selected)
    if (pending_[v]) {
      pending_[v] = 0;
      --remaining_;
    }
  if (remaining_ > 0) {
    // Neutralized: still pending (so enabled until now) but disabled after.
    std::vector<char> on(pending_.size(), 0);
    for (VertexIndex v : enabled_after) on[v] = 1;
    for (std::size_t v = 0; v < pending_.size(); ++v)
      if (pending_[v] && !on[v]) {
        pending_[v] = 0;
        --remaining_;
      }
  }
  if (remaining_ > 0) return false;
  ++completed_;
  start(enabled_after);
  return true;
}

std::size_t rounds(const ExecutionTrace& trace) {
  if (trace.enabled.empty()) return 0;
  if (trace.enabled.size() != trace.steps.size() + 1)
    throw std::invalid_argument("trace does not carry per-configuration enabled sets");
  const std::size_t n = trace.initial.size();
  RoundCounter counter(n);
  counter.start(trace.enabled[0]);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    std::vector<VertexIndex> sel;
    sel.reserve(trace.steps[i].selected.size());
    for (ProcessId id : trace.steps[i].selected) {
      auto it = std::lower_bound(trace.vertex_ids.begin(), trace.vertex_ids.end(), id);
      if (it == trace.vertex_ids.end() || *it != id) throw std::invalid_argument("trace names an unknown process");
      sel.push_back(static_cast<VertexIndex>(it - trace.vertex_ids.begin()));
    }
    counter.advance(sel, trace.enabled[i + 1]);
  }
  return counter.completed();
}

std::size_t default_budget(const Graph& g) { return 10000 * g.size() * (g.diameter() + 1); }

RunResult run(const Graph& g, const Configuration& cfg0, const AlgorithmSpec& alg, const DaemonPolicy& policy,
              std::size_t max_steps, const RunOptions& options) {
  const std::size_t n = g.size();
  RunResult result;
  result.trace.initial = cfg0;
  for (const auto& a : alg.actions) result.trace.labels.push_back(a.label);
  result.trace.vertex_ids.assign(g.vertices().begin(), g.vertices().end());

  Configuration cfg = cfg0;
  std::vector<std::optional<std::size_t>> firing(n);
  std::vector<VertexIndex> enabled;
  auto refresh = [&](VertexIndex v) { firing[v] = alg.first_enabled(View(g, cfg, v)); };
  auto collect = [&] {
    enabled.clear();
    for (VertexIndex v = 0; v < n; ++v)
      if (firing[v]) enabled.push_back(v);
  };
  for (VertexIndex v = 0; v < n; ++v) refresh(v);
  collect();

  Daemon daemon(policy, n);
  RoundCounter counter(n);
  counter.start(enabled);
  if (options.record_steps) result.trace.enabled.push_back(enabled);

  std::vector<char> dirty(n, 0);
  std::size_t steps = 0;
  while (!enabled.empty()) {
    if (steps >= max_steps || daemon.exhausted()) {
      result.verdict = Verdict::budget_exhausted;
      break;
    }
    std::vector<VertexIndex> chosen = daemon.select(g, enabled);
    StepRecord rec;
    std::vector<std::size_t> acts;
    for (VertexIndex v : chosen) {
      if (!firing[v])
        throw DaemonContractError("daemon selected process " + std::to_string(g.id_of(v)) + " which is not enabled");
      rec.selected.push_back(g.id_of(v));
      rec.fired.push_back(static_cast<std::uint16_t>(*firing[v]));
      acts.push_back(*firing[v]);
    }
    std::vector<VarStore> updated;
    updated.reserve(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      updated.push_back(cfg[chosen[i]]);
      StoreWriter writer(*alg.schema, updated.back());
      execute(alg.actions, acts[i], View(g, cfg, chosen[i]), writer);
    }
    std::fill(dirty.begin(), dirty.end(), 0);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const VertexIndex v = chosen[i];
      if (updated[i] == cfg[v]) continue;
      cfg[v] = std::move(updated[i]);
      dirty[v] = 1;
      for (VertexIndex w : g.adjacent(v)) dirty[w] = 1;
    }
    for (VertexIndex v = 0; v < n; ++v)
      if (dirty[v]) refresh(v);
    collect();
    ++steps;

    const bool round_end = counter.advance(chosen, enabled);
    if (round_end) result.trace.round_boundaries.push_back(steps);
    if (options.observer) options.observer(StepEvent{steps - 1, cfg, rec, chosen, round_end});
    if (options.record_steps) {
      result.trace.steps.push_back(std::move(rec));
      result.trace.enabled.push_back(enabled);
    }
  }
  result.steps = steps;
  result.rounds = counter.completed();
  result.final = std::move(cfg);
  return result;
}

}  // namespace selfstab
