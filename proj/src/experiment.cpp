#include "selfstab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "selfstab/bfs.hpp"
#include "selfstab/loop.hpp"

namespace selfstab::experiment {

using nlohmann::json;

Corruption parse_corruption(const std::string& text) {
  Corruption c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("corruption field '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "vars") {
        std::stringstream vs(val);
        std::string v;
        while (std::getline(vs, v, '+'))
          if (!v.empty()) c.vars.push_back(v);
      } else if (key == "count") {
        c.count = std::stoull(val);
      } else if (key == "seed") {
        c.seed = std::stoull(val);
      } else if (key == "at") {
        c.at = std::stoull(val);
      } else {
        throw InputError("unknown corruption field '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw InputError("bad value in corruption field '" + item + "'");
    }
  }
  if (c.vars.empty() && c.count > 0) throw InputError("corruption names no variables");
  return c;
}

namespace {

Graph graph_from_json(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    return load_graph(p);
  }
  if (j.is_object() && j.contains("family"))
    return make_family(j.at("family").get<std::string>(), j.at("n").get<std::size_t>(), j.value("seed", 1ULL));
  if (j.is_object()) return parse_graph(j.dump());
  throw InputError("descriptor field 'graph' must be a path or an object");
}

DaemonPolicy daemon_from_json(const json& j) {
  DaemonPolicy d;
  if (j.is_null()) return d;
  d.kind = parse_daemon_kind(j.value("kind", std::string("random")));
  d.p = j.value("p", 0.5);
  d.seed = j.value("seed", 1ULL);
  d.fairness_aging = j.value("fairness_aging", d.kind != DaemonPolicy::Kind::scripted);
  if (j.contains("script")) d.script = j.at("script").get<std::vector<std::vector<ProcessId>>>();
  if (d.kind == DaemonPolicy::Kind::random && !(d.p > 0.0 && d.p <= 1.0))
    throw InputError("daemon probability must lie in (0, 1]");
  return d;
}

}  // namespace

RunSpec parse_descriptor(const json& j, const std::filesystem::path& base) {
  try {
    RunSpec s;
    if (!j.is_object()) throw InputError("descriptor must be a JSON object");
    if (j.value("algorithm", std::string("kgrouping")) != "kgrouping")
      throw InputError("unknown algorithm '" + j.at("algorithm").get<std::string>() + "'");
    if (!j.contains("graph")) throw InputError("descriptor lacks 'graph'");
    s.graph = graph_from_json(j.at("graph"), base);
    s.k = j.at("k").get<int>();
    s.daemon = daemon_from_json(j.value("daemon", json()));
    if (j.contains("max_steps") && !j.at("max_steps").is_null()) {
      const auto m = j.at("max_steps").get<long long>();
      if (m < 1) throw InputError("max_steps must be positive");
      s.max_steps = static_cast<std::size_t>(m);
    }
    if (j.contains("init")) {
      const json& i = j.at("init");
      const std::string mode = i.value("mode", std::string("zeroed"));
      if (mode == "zeroed") {
        s.init.mode = InitMode::zeroed;
      } else if (mode == "random") {
        s.init.mode = InitMode::random;
      } else if (mode == "file") {
        s.init.mode = InitMode::file;
        s.init.path = i.at("path").get<std::string>();
        if (s.init.path.is_relative()) s.init.path = base / s.init.path;
      } else {
        throw InputError("unknown init mode '" + mode + "'");
      }
      s.init.seed = i.value("seed", 1ULL);
    }
    auto out_path = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (!j.contains(key)) return std::nullopt;
      std::filesystem::path p = j.at(key).get<std::string>();
      return p.is_relative() ? base / p : p;
    };
    s.trace_path = out_path("trace");
    s.report_path = out_path("report");
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed descriptor: ") + e.what());
  } catch (const GraphError& e) {
    throw InputError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

RunSpec load_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return parse_descriptor(j, path.parent_path());
}

Configuration zeroed_configuration(const kgrouping::Instance& inst, const Graph& g) {
  return make_configuration(*inst.schema, g);
}

namespace {

struct IdPool {
  std::vector<ProcessId> ids;  // real ids followed by false ids
  std::size_t real = 0;
};

IdPool id_pool(const Graph& g) {
  IdPool p;
  p.ids.assign(g.vertices().begin(), g.vertices().end());
  p.real = p.ids.size();
  const ProcessId top = p.ids.back();
  const std::size_t extra = g.size() / 2 + 1;
  for (std::size_t i = 1; i <= extra; ++i) p.ids.push_back(top + static_cast<ProcessId>(3 * i));
  return p;
}

std::int64_t random_in(const VarDecl& d, Rng& rng, const IdPool& pool) {
  if (d.id_valued) return pool.ids[rng.below(pool.ids.size())];
  return rng.between(d.range.lo, d.range.hi);
}

void randomize(StoreWriter& w, const VarRef& var, Rng& rng, const IdPool& pool) {
  const VarDecl& d = w.schema().decl(var);
  if (auto s = std::get_if<ScalarVar>(&var)) {
    w.set(*s, d.nullable && rng.chance(0.2) ? bot : Value(random_in(d, rng, pool)));
  } else if (auto s = std::get_if<SetVar>(&var)) {
    IdSet out;
    for (ProcessId id : pool.ids)
      if (rng.chance(0.3)) out.push_back(id);
    w.set(*s, std::move(out));
  } else {
    const ArrayVar a = std::get<ArrayVar>(var);
    w.assign(a, [&](ProcessId) { return rng.chance(0.3) ? bot : Value(random_in(d, rng, pool)); });
  }
}

// Scalars first, then sets (which prune arrays), then arrays.
std::vector<VarRef> ordered_vars(const Schema& schema) {
  std::vector<VarRef> out = schema.all();
  std::stable_sort(out.begin(), out.end(), [](const VarRef& a, const VarRef& b) { return a.index() < b.index(); });
  return out;
}

}  // namespace

Configuration random_configuration(const kgrouping::Instance& inst, const Graph& g, std::uint64_t seed) {
  Rng rng(seed);
  const IdPool pool = id_pool(g);
  Configuration cfg = make_configuration(*inst.schema, g);
  const auto vars = ordered_vars(*inst.schema);
  for (VertexIndex v = 0; v < g.size(); ++v) {
    StoreWriter w(*inst.schema, cfg[v]);
    for (const auto& var : vars) randomize(w, var, rng, pool);
  }
  return cfg;
}

json configuration_to_json(const Schema& schema, const Graph& g, const Configuration& cfg) {
  json out = json::object();
  for (VertexIndex v = 0; v < g.size(); ++v) {
    json p = json::object();
    for (const auto& var : schema.all()) {
      const std::string name(schema.name(var));
      if (auto s = std::get_if<ScalarVar>(&var)) {
        const Value x = cfg[v].get(*s);
        p[name] = x ? json(*x) : json(nullptr);
      } else if (auto s = std::get_if<SetVar>(&var)) {
        p[name] = cfg[v].get(*s);
      } else {
        json m = json::object();
        for (const auto& [key, val] : cfg[v].get(std::get<ArrayVar>(var))) m[std::to_string(key)] = val;
        p[name] = m;
      }
    }
    out[std::to_string(g.id_of(v))] = p;
  }
  return out;
}

Configuration configuration_from_json(const Schema& schema, const Graph& g, const json& j) {
  if (!j.is_object()) throw InputError("configuration must be an object keyed by process id");
  Configuration cfg = make_configuration(schema, g);
  try {
    for (const auto& [pid, vars] : j.items()) {
      const ProcessId id = static_cast<ProcessId>(std::stoul(pid));
      if (!g.contains(id)) throw InputError("configuration names unknown process " + pid);
      StoreWriter w(schema, cfg[g.index_of(id)]);
      // Sets before arrays so keyed entries survive.
      std::vector<std::pair<VarRef, const json*>> items;
      for (const auto& [name, val] : vars.items()) {
        auto var = schema.find(name);
        if (!var) throw InputError("unknown variable '" + name + "'");
        items.emplace_back(*var, &val);
      }
      std::stable_sort(items.begin(), items.end(),
                       [](const auto& a, const auto& b) { return a.first.index() < b.first.index(); });
      for (const auto& [var, val] : items) {
        if (auto s = std::get_if<ScalarVar>(&var)) {
          w.set(*s, val->is_null() ? bot : Value(val->get<std::int64_t>()));
        } else if (auto s = std::get_if<SetVar>(&var)) {
          w.set(*s, val->get<IdSet>());
        } else {
          SlotMap m;
          for (const auto& [key, x] : val->items())
            if (!x.is_null()) m.put(static_cast<ProcessId>(std::stoul(key)), x.get<std::int64_t>());
          w.set(std::get<ArrayVar>(var), std::move(m));
        }
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed configuration: ") + e.what());
  } catch (const SchemaError& e) {
    throw InputError(e.what());
  } catch (const std::logic_error& e) {
    throw InputError(std::string("malformed configuration: ") + e.what());
  }
  return cfg;
}

Configuration make_initial(const kgrouping::Instance& inst, const Graph& g, const InitSpec& spec) {
  switch (spec.mode) {
    case InitMode::zeroed: return zeroed_configuration(inst, g);
    case InitMode::random: return random_configuration(inst, g, spec.seed);
    case InitMode::file: {
      std::ifstream in(spec.path);
      if (!in) throw InputError("cannot open " + spec.path.string());
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw InputError(spec.path.string() + ": " + e.what());
      }
      return configuration_from_json(*inst.schema, g, j);
    }
  }
  return zeroed_configuration(inst, g);
}

std::size_t slot_count(const kgrouping::Instance& inst, const Graph& g) {
  return g.size() * inst.schema->all().size();
}

std::size_t corrupt(const kgrouping::Instance& inst, const Graph& g, Configuration& cfg, const Corruption& c) {
  if (c.count == 0) return 0;
  std::vector<VarRef> vars;
  for (const auto& name : c.vars) {
    if (name == "all") {
      for (const auto& v : inst.schema->all()) vars.push_back(v);
      continue;
    }
    auto v = inst.schema->find(name);
    if (!v) throw InputError("unknown variable '" + name + "'");
    vars.push_back(*v);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  std::vector<std::pair<VertexIndex, VarRef>> slots;
  for (VertexIndex v = 0; v < g.size(); ++v)
    for (const auto& var : vars) slots.emplace_back(v, var);
  Rng rng(c.seed);
  const std::size_t m = std::min(c.count, slots.size());
  for (std::size_t i = 0; i < m; ++i) std::swap(slots[i], slots[i + rng.below(slots.size() - i)]);
  slots.resize(m);
  std::stable_sort(slots.begin(), slots.end(),
                   [](const auto& a, const auto& b) { return a.second.index() < b.second.index(); });
  const IdPool pool = id_pool(g);
  for (const auto& [v, var] : slots) {
    StoreWriter w(*inst.schema, cfg[v]);
    randomize(w, var, rng, pool);
  }
  return m;
}

std::string step_line(const StepRecord& rec, std::size_t step, bool round_end,
                      const std::vector<std::string>& labels) {
  json j;
  j["step"] = step;
  j["selected"] = rec.selected;
  json fired = json::array();
  for (auto a : rec.fired) fired.push_back(labels.at(a));
  j["fired"] = fired;
  if (round_end) j["round_end"] = true;
  return j.dump();
}

namespace {

std::size_t stored_keys(const Configuration& cfg) {
  std::size_t m = 0;
  for (const auto& s : cfg.stores) m = std::max(m, s.stored_keys());
  return m;
}

std::size_t false_ids(const kgrouping::Instance& inst, const Graph& g, const Configuration& cfg) {
  std::set<ProcessId> out;
  for (const auto& s : cfg.stores)
    for (ProcessId id : s.get(inst.vars.domain))
      if (!g.contains(id)) out.insert(id);
  return out.size();
}

class Instrument {
 public:
  Instrument(const kgrouping::Instance& inst, const Graph& g, const DaemonPolicy& daemon, bool checks)
      : inst_(inst), g_(g), daemon_(daemon), checks_(checks) {
    const auto& spec = inst.spec();
    l12_ = *spec.find("L12");
    l13_ = *spec.find("L13");
    l14_ = *spec.find("L14");
  }

  void observe(const StepEvent& e, std::size_t offset) {
    if (e.selected.empty() || e.selected.front() != 0) return;  // root is vertex 0
    const std::size_t a = e.record.fired.front();
    const VarStore& root = e.after[0];
    if (a == l14_) ++iterations_;
    if (a == l12_ && root.num(inst_.colors().cl) == 1) {
      armed_ = clean(e.after);
      return;
    }
    if (a == l13_ && armed_) boundary(e.after, e.step + offset);
    armed_ = false;
  }

  std::size_t iterations() const { return iterations_; }
  std::vector<Boundary>& boundaries() { return boundaries_; }
  std::size_t max_keys() const { return max_keys_; }

 private:
  bool clean(const Configuration& cfg) const {
    if (!bfs::legitimate(g_, cfg, inst_.bfs())) return false;
    for (const auto& s : cfg.stores)
      if (s.num(inst_.colors().mode) != loop::kModeA) return false;
    return true;
  }

  void boundary(const Configuration& cfg, std::size_t step) {
    max_keys_ = std::max(max_keys_, stored_keys(cfg));
    if (!checks_) return;
    Boundary b;
    b.step = step;
    b.wave_ok = true;
    const auto& lv = inst_.colors();
    for (VertexIndex v = 0; v < g_.size(); ++v) {
      const VarStore& s = cfg[v];
      if (s.num(lv.cl) != 2 || s.num(lv.rst) != 0 || s.num(lv.mode) != loop::kModeA ||
          inst_.loop.A.enabled(View(g_, cfg, v)))
        b.wave_ok = false;
    }
    const Configuration shifted = loop::copy_shift(cfg, *inst_.schema, inst_.loop.binding.copies);
    b.shift_ok = !loop::any_error(g_, shifted, inst_.loop);
    b.stamp_errors = oracle::stamp_violations(g_, shifted, inst_.vars, inst_.k).size();
    b.potential = oracle::potential(g_, shifted, inst_.vars, inst_.k);
    b.goal = shifted == cfg;
    DaemonPolicy d = daemon_;
    if (d.kind == DaemonPolicy::Kind::scripted) d = DaemonPolicy::synchronous();
    d.seed = mix_seed(d.seed, boundaries_.size() + 101);
    RunOptions opt;
    opt.record_steps = false;
    const RunResult r = run(g_, shifted, inst_.loop.A, d, default_budget(g_), opt);
    b.merge_rounds = r.rounds;
    b.merge_terminated = r.verdict == Verdict::terminated;
    boundaries_.push_back(b);
  }

  const kgrouping::Instance& inst_;
  const Graph& g_;
  DaemonPolicy daemon_;
  bool checks_;
  std::size_t l12_, l13_, l14_;
  bool armed_ = false;
  std::size_t iterations_ = 0;
  std::size_t max_keys_ = 0;
  std::vector<Boundary> boundaries_;
};

}  // namespace

Outcome execute(const kgrouping::Instance& inst, const Graph& g, const Configuration& cfg0,
                const DaemonPolicy& daemon, std::size_t max_steps, const Options& options) {
  Outcome o;
  o.false_ids = false_ids(inst, g, cfg0);
  o.max_stored_keys = stored_keys(cfg0);
  Instrument probe(inst, g, daemon, options.instrument);
  const auto& labels = inst.spec().actions;
  std::vector<std::string> names;
  for (const auto& a : labels) names.push_back(a.label);
  std::string trace;

  auto phase = [&](const Configuration& from, const DaemonPolicy& d, std::size_t budget, std::size_t offset) {
    RunOptions opt;
    opt.record_steps = false;
    opt.observer = [&](const StepEvent& e) {
      probe.observe(e, offset);
      if (options.keep_trace) {
        trace += step_line(e.record, e.step + offset, e.round_end, names);
        trace += '\n';
      }
    };
    return run(g, from, inst.spec(), d, budget, opt);
  };

  Configuration start = cfg0;
  DaemonPolicy d = daemon;
  std::size_t budget = max_steps;
  if (options.corruption && options.corruption->count > 0) {
    const std::size_t at = std::min(options.corruption->at, max_steps);
    RunResult first = phase(start, d, at, 0);
    o.steps += first.steps;
    o.rounds += first.rounds;
    budget -= first.steps;
    start = std::move(first.final);
    corrupt(inst, g, start, *options.corruption);
    o.max_stored_keys = std::max(o.max_stored_keys, stored_keys(start));
    if (d.kind == DaemonPolicy::Kind::scripted) {
      d.script.erase(d.script.begin(), d.script.begin() + static_cast<std::ptrdiff_t>(
                                                             std::min(first.steps, d.script.size())));
    } else {
      d.seed = mix_seed(d.seed, 1);
    }
  }
  RunResult r = phase(start, d, budget, o.steps);
  o.steps += r.steps;
  o.rounds += r.rounds;
  o.verdict = r.verdict;
  o.final = std::move(r.final);
  o.iterations = probe.iterations();
  o.boundaries = std::move(probe.boundaries());
  o.max_stored_keys = std::max({o.max_stored_keys, probe.max_keys(), stored_keys(o.final)});
  o.report = oracle::check_Lk(g, o.final, inst.vars.group, inst.k);
  o.cfin = loop::check_Cfin(g, o.final, inst.loop);
  if (options.keep_trace) {
    json s;
    s["summary"] = true;
    s["steps"] = o.steps;
    s["rounds"] = o.rounds;
    s["verdict"] = to_string(o.verdict);
    trace += s.dump();
    trace += '\n';
    o.trace = std::move(trace);
  }
  return o;
}

Outcome execute(const RunSpec& spec, const Options& options) {
  const auto inst = kgrouping::make_instance(spec.graph, spec.k);
  const Configuration cfg0 = make_initial(inst, spec.graph, spec.init);
  Options opt = options;
  opt.keep_trace = opt.keep_trace || spec.trace_path.has_value();
  return execute(inst, spec.graph, cfg0, spec.daemon, spec.max_steps.value_or(default_budget(spec.graph)), opt);
}

nlohmann::json summary_json(const Outcome& o, const RunSpec& spec) {
  json j;
  j["n"] = spec.graph.size();
  j["D"] = spec.graph.diameter();
  j["k"] = spec.k;
  j["daemon"] = to_string(spec.daemon.kind);
  j["seed"] = spec.daemon.seed;
  j["steps"] = o.steps;
  j["rounds"] = o.rounds;
  j["verdict"] = to_string(o.verdict);
  j["iterations"] = o.iterations;
  j["group_count"] = o.report.group_count;
  j["grouping_valid"] = o.report.verdict;
  j["final_ok"] = o.cfin;
  j["max_stored_keys"] = o.max_stored_keys;
  j["false_ids"] = o.false_ids;
  return j;
}

nlohmann::json report_json(const Outcome& o) {
  json j = oracle::to_json(o.report);
  j["final_ok"] = o.cfin;
  j["verdict_run"] = to_string(o.verdict);
  return j;
}

int exit_code(const Outcome& o) {
  if (o.verdict == Verdict::budget_exhausted) return 2;
  if (!o.report.verdict || !o.cfin) return 1;
  return 0;
}

Graph make_family(const std::string& family, std::size_t n, std::uint64_t seed) {
  if (family == "path") return make_path(n);
  if (family == "cycle") return make_cycle(n);
  if (family == "grid") {
    std::size_t rows = 1;
    while ((rows + 1) * (rows + 1) <= n) ++rows;
    return make_grid(rows, (n + rows - 1) / rows);
  }
  if (family == "random-gnp") return make_random_connected(n, 2.0 / static_cast<double>(n), seed, true);
  throw InputError("unknown graph family '" + family + "'");
}

SweepRow sweep_one(const std::string& family, std::size_t n, int k, std::uint64_t seed) {
  const Graph g = make_family(family, n, seed);
  const auto inst = kgrouping::make_instance(g, k);
  const Configuration cfg0 = random_configuration(inst, g, mix_seed(seed, 11));
  const Outcome o = execute(inst, g, cfg0, DaemonPolicy::random(0.5, mix_seed(seed, 7)), default_budget(g));
  SweepRow row;
  row.family = family;
  row.n = g.size();
  row.D = g.diameter();
  row.k = k;
  row.seed = seed;
  row.rounds = o.rounds;
  row.iterations = o.iterations;
  row.groups = o.report.group_count;
  row.verdict = exit_code(o) == 0;
  row.steps = o.steps;
  return row;
}

std::vector<SweepRow> sweep(const std::string& family, const std::vector<std::size_t>& ns, const std::vector<int>& ks,
                            const std::vector<std::uint64_t>& seeds, unsigned threads) {
  struct Task {
    std::size_t n;
    int k;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t n : ns)
    for (int k : ks)
      for (std::uint64_t s : seeds) tasks.push_back({n, k, s});
  // Bad families, sizes or k surface here rather than inside a worker.
  for (std::size_t n : ns) {
    const Graph g = make_family(family, n, 1);
    for (int k : ks) kgrouping::make_instance(g, k);
  }
  std::vector<SweepRow> rows(tasks.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      rows[i] = sweep_one(family, tasks[i].n, tasks[i].k, tasks[i].seed);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "family,n,D,k,seed,rounds,iterations,groups,verdict,steps\n";
  for (const auto& r : rows)
    out << r.family << ',' << r.n << ',' << r.D << ',' << r.k << ',' << r.seed << ',' << r.rounds << ','
        << r.iterations << ',' << r.groups << ',' << (r.verdict ? "true" : "false") << ',' << r.steps << '\n';
}

}  // namespace selfstab::experiment
