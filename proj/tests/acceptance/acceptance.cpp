// Acceptance runner: prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "selfstab/experiment.hpp"
#include "selfstab/loop.hpp"
#include "selfstab/oracle.hpp"

using namespace selfstab;
namespace ex = selfstab::experiment;

namespace {

// Pinned workload sizes and tolerances.
constexpr std::size_t kRandomRuns = 300;
constexpr std::size_t kCampaigns = 100;
constexpr std::size_t kReplays = 20;
constexpr double kHeadroom = 2.0;         // validation slack over the fitted constant
constexpr double kCorruptFraction = 0.25;  // max share of corrupted slots

struct Result {
  bool pass = true;
  std::string detail;
};

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

struct Run {
  std::string label;
  Graph graph = make_path(2);
  int k = 1;
  ex::Outcome outcome;
};

std::string describe(const Run& r) {
  return r.label + " n=" + std::to_string(r.graph.size()) + " k=" + std::to_string(r.k);
}

bool converged(const ex::Outcome& o) {
  return o.verdict == Verdict::terminated && o.report.verdict && o.cfin;
}

// Random connected graphs, random daemons, random initial configurations.
std::vector<Run> random_runs() {
  std::vector<Run> runs(kRandomRuns);
  parallel_for(kRandomRuns, [&](std::size_t i) {
    Rng rng(mix_seed(20240601, i));
    const auto n = static_cast<std::size_t>(rng.between(4, 30));
    const double p = 0.08 + 0.4 * rng.unit();
    Run& r = runs[i];
    r.label = "random#" + std::to_string(i);
    r.graph = make_random_connected(n, p, rng.next(), true);
    r.k = static_cast<int>(rng.between(1, 6));
    const auto inst = kgrouping::make_instance(r.graph, r.k);
    const Configuration cfg0 = ex::random_configuration(inst, r.graph, rng.next());
    const auto daemon = DaemonPolicy::random(0.2 + 0.8 * rng.unit(), rng.next());
    ex::Options opt;
    opt.instrument = true;
    r.outcome = ex::execute(inst, r.graph, cfg0, daemon, default_budget(r.graph), opt);
  });
  return runs;
}

// Path and cycle sweep from random initial configurations.
std::vector<Run> sweep_runs() {
  struct Task {
    std::string family;
    std::size_t n;
    int k;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const char* fam : {"path", "cycle"})
    for (std::size_t n = 6; n <= 48; n += 6)
      for (int k : {2, 4})
        for (std::uint64_t s = 1; s <= 5; ++s) tasks.push_back({fam, n, k, s});
  std::vector<Run> runs(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    Run& r = runs[i];
    r.label = t.family + "#" + std::to_string(t.seed);
    r.graph = ex::make_family(t.family, t.n, t.seed);
    r.k = t.k;
    const auto inst = kgrouping::make_instance(r.graph, r.k);
    const Configuration cfg0 = ex::random_configuration(inst, r.graph, mix_seed(t.seed, 11));
    ex::Options opt;
    opt.instrument = true;
    r.outcome = ex::execute(inst, r.graph, cfg0, DaemonPolicy::random(0.5, mix_seed(t.seed, 7)),
                            default_budget(r.graph), opt);
  });
  return runs;
}

std::vector<Graph> load_atlas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Graph> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_graph(line));
  return out;
}

// Fits c = max(y/x) on the half of the samples with the smallest order key;
// the other half must stay within kHeadroom * c.
struct Sample {
  double key;
  double x;
  double y;
};

struct Fit {
  double c = 0;
  double worst = 0;  // max y/x over the validation half
  bool ok = false;
};

Fit fit(std::vector<Sample> s) {
  std::stable_sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) { return a.key < b.key; });
  Fit f;
  const std::size_t half = s.size() / 2;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double& slot = i < half ? f.c : f.worst;
    slot = std::max(slot, s[i].y / s[i].x);
  }
  f.ok = f.worst <= kHeadroom * f.c + 1e-12;
  return f;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

Result crit_convergence(const std::vector<Run>& runs) {
  Result r;
  std::size_t ok = 0, false_ids = 0;
  for (const auto& run : runs) {
    false_ids += run.outcome.false_ids > 0;
    if (converged(run.outcome)) {
      ++ok;
    } else if (r.pass) {
      r.pass = false;
      r.detail = "first failure " + describe(run) + " ";
    }
  }
  r.detail += std::to_string(ok) + "/" + std::to_string(runs.size()) + " runs converged to a valid grouping, " +
              std::to_string(false_ids) + " started with false ids";
  return r;
}

Result crit_group_bound(const std::vector<const std::vector<Run>*>& sets, const std::vector<Graph>& atlas) {
  Result r;
  std::size_t checked = 0;
  for (const auto* runs : sets)
    for (const auto& run : *runs) {
      if (run.outcome.verdict != Verdict::terminated) continue;
      ++checked;
      const double bound = 2.0 * static_cast<double>(run.graph.size()) / run.k + 1.0;
      if (static_cast<double>(run.outcome.report.group_count) > bound && r.pass) {
        r.pass = false;
        r.detail = describe(run) + " has " + std::to_string(run.outcome.report.group_count) + " groups; ";
      }
    }
  std::vector<char> small_ok(atlas.size() * 2, 0);
  parallel_for(atlas.size() * 2, [&](std::size_t i) {
    const Graph& g = atlas[i / 2];
    const int k = static_cast<int>(i % 2) + 1;
    const auto inst = kgrouping::make_instance(g, k);
    const Configuration cfg0 = ex::random_configuration(inst, g, mix_seed(i, 3));
    const auto o = ex::execute(inst, g, cfg0, DaemonPolicy::random(0.5, mix_seed(i, 5)), default_budget(g));
    small_ok[i] = converged(o) && o.report.group_count >= oracle::exhaustive_min_groups(g, k) &&
                  static_cast<double>(o.report.group_count) <= 2.0 * static_cast<double>(g.size()) / k + 1.0;
  });
  const auto small_pass = static_cast<std::size_t>(std::count(small_ok.begin(), small_ok.end(), 1));
  if (small_pass != small_ok.size()) r.pass = false;
  r.detail += std::to_string(checked) + " runs within 2n/k+1; " + std::to_string(small_pass) + "/" +
              std::to_string(small_ok.size()) + " small-graph runs valid and at or above the exhaustive minimum";
  return r;
}

Result crit_rounds(const std::vector<Run>& runs) {
  std::vector<Sample> xy;
  for (const auto& run : runs) {
    const double n = static_cast<double>(run.graph.size()), D = run.graph.diameter();
    const double x = n * D / run.k + n;
    xy.push_back({x, x, static_cast<double>(run.outcome.rounds)});
  }
  const Fit f = fit(xy);
  bool all = std::all_of(runs.begin(), runs.end(), [](const Run& r) { return converged(r.outcome); });
  return {f.ok && all, "c=" + fmt(f.c) + " validation max=" + fmt(f.worst) + " (limit " + fmt(kHeadroom * f.c) +
                           ") over " + std::to_string(runs.size()) + " runs"};
}

// Iterations are fitted on the sweep; Merge execution lengths on every
// instrumented run, split by n.
Result crit_iterations(const std::vector<Run>& runs, const std::vector<Run>& extra) {
  std::vector<Sample> it, mr;
  std::size_t executions = 0;
  bool merge_ok = true;
  for (const auto& run : runs) {
    const double n = static_cast<double>(run.graph.size());
    it.push_back({n / run.k, n / run.k, static_cast<double>(run.outcome.iterations)});
  }
  for (const auto* set : {&runs, &extra})
    for (const auto& run : *set) {
      const double n = static_cast<double>(run.graph.size());
      for (const auto& b : run.outcome.boundaries) {
        ++executions;
        merge_ok = merge_ok && b.merge_terminated;
        mr.push_back({n, static_cast<double>(run.k), static_cast<double>(b.merge_rounds)});
      }
    }
  const Fit fi = fit(it), fm = fit(mr);
  return {fi.ok && fm.ok && merge_ok,
          "iterations c'=" + fmt(fi.c) + " validation max=" + fmt(fi.worst) + "; per-Merge rounds/k c''=" +
              fmt(fm.c) + " validation max=" + fmt(fm.worst) + " over " + std::to_string(executions) + " executions"};
}

Result crit_boundaries(const std::vector<const std::vector<Run>*>& sets, bool stamps) {
  Result r;
  std::size_t total = 0, clean = 0, bad = 0;
  std::size_t potential_bad = 0, stalls = 0;
  for (const auto* runs : sets)
    for (const auto& run : *runs) {
      const auto& bs = run.outcome.boundaries;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        ++total;
        if (!bs[i].wave_ok) continue;
        ++clean;
        const bool fail = stamps ? bs[i].stamp_errors > 0 : !bs[i].shift_ok;
        if (fail && bad++ == 0) r.detail = "first failure " + describe(run) + " at step " +
                                           std::to_string(bs[i].step) + "; ";
        if (i > 0 && bs[i].potential.total() > bs[i - 1].potential.total()) ++potential_bad;
        if (i > 1 && !bs[i - 1].goal && bs[i].potential.total() >= bs[i - 2].potential.total()) ++stalls;
      }
    }
  r.pass = bad == 0 && clean == total;
  r.detail += std::to_string(total) + " boundaries, " + std::to_string(clean) + " with a quiet tree, " +
              std::to_string(bad) + " violations";
  if (!stamps) r.detail += ", " + std::to_string(potential_bad) + " potential increases, " +
                          std::to_string(stalls) + " two-iteration stalls before the goal";
  return r;
}

struct Campaign {
  Run run;
  std::size_t corrupted = 0;
  std::size_t slots = 0;
};

std::vector<Campaign> campaigns() {
  const std::vector<std::vector<std::string>> groups = {
      {"cl", "mode", "rst"},
      {"in-group", "in-groups", "in-groupD", "in-stampON", "in-prior", "in-stamp1", "in-stamp2", "in-stampD"},
      {"merging", "stampON", "prior", "cl", "rst"},
      {"group", "groupD", "stamp1", "stamp2", "stampD", "mode"},
      {"all"},
  };
  std::vector<Campaign> out(kCampaigns);
  parallel_for(kCampaigns, [&](std::size_t i) {
    Rng rng(mix_seed(777, i));
    Campaign& c = out[i];
    const auto n = static_cast<std::size_t>(rng.between(4, 20));
    c.run.graph = (i % 4 == 0) ? make_cycle(n) : make_random_connected(n, 0.1 + 0.3 * rng.unit(), rng.next(), true);
    c.run.k = static_cast<int>(rng.between(1, 4));
    c.run.label = "campaign#" + std::to_string(i);
    const auto inst = kgrouping::make_instance(c.run.graph, c.run.k);
    ex::Corruption corr;
    corr.vars = groups[i % groups.size()];
    c.slots = ex::slot_count(inst, c.run.graph);
    const auto cap = static_cast<std::size_t>(kCorruptFraction * static_cast<double>(c.slots));
    corr.count = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(cap)));
    corr.seed = rng.next();
    corr.at = static_cast<std::size_t>(rng.between(0, 2000));
    ex::Options opt;
    opt.corruption = corr;
    const Configuration cfg0 = ex::zeroed_configuration(inst, c.run.graph);
    c.run.outcome = ex::execute(inst, c.run.graph, cfg0, DaemonPolicy::random(0.5, rng.next()),
                                default_budget(c.run.graph), opt);
    // The effective count is capped by the named variables' slots.
    c.corrupted = std::min(corr.count, c.slots);
  });
  return out;
}

Result crit_faults(const std::vector<Campaign>& cs) {
  Result r;
  std::size_t ok = 0;
  for (const auto& c : cs) {
    const bool within = static_cast<double>(c.corrupted) <= kCorruptFraction * static_cast<double>(c.slots);
    if (converged(c.run.outcome) && within) {
      ++ok;
    } else if (r.pass) {
      r.pass = false;
      r.detail = "first failure " + describe(c.run) + "; ";
    }
  }
  r.detail += std::to_string(ok) + "/" + std::to_string(cs.size()) + " campaigns re-converged";
  return r;
}

Result crit_silence(const std::vector<const std::vector<Run>*>& sets) {
  std::vector<const Run*> all;
  for (const auto* runs : sets)
    for (const auto& run : *runs)
      if (run.outcome.verdict == Verdict::terminated) all.push_back(&run);
  std::vector<char> ok(all.size(), 0);
  parallel_for(all.size(), [&](std::size_t i) {
    const Run& run = *all[i];
    const auto inst = kgrouping::make_instance(run.graph, run.k);
    RunOptions opt;
    opt.record_steps = false;
    const auto again = selfstab::run(run.graph, run.outcome.final, inst.spec(), DaemonPolicy::synchronous(), 10, opt);
    ok[i] = again.steps == 0 && loop::check_Cfin(run.graph, run.outcome.final, inst.loop);
  });
  const auto good = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  return {good == all.size() && !all.empty(),
          std::to_string(good) + "/" + std::to_string(all.size()) + " final configurations silent and final"};
}

Result crit_replay() {
  std::vector<char> same(kReplays, 0);
  parallel_for(kReplays, [&](std::size_t i) {
    Rng rng(mix_seed(99, i));
    ex::RunSpec spec;
    spec.graph = make_random_connected(static_cast<std::size_t>(rng.between(4, 16)), 0.3, rng.next(), true);
    spec.k = static_cast<int>(rng.between(1, 4));
    spec.daemon = i % 3 == 0 ? DaemonPolicy::central(rng.next()) : DaemonPolicy::random(0.5, rng.next());
    spec.init.mode = ex::InitMode::random;
    spec.init.seed = rng.next();
    ex::Options opt;
    opt.keep_trace = true;
    if (i % 2) opt.corruption = ex::Corruption{{"cl", "in-group"}, 5, rng.next(), 100};
    const auto a = ex::execute(spec, opt);
    const auto b = ex::execute(spec, opt);
    same[i] = a.trace == b.trace && !a.trace.empty() &&
              ex::summary_json(a, spec).dump() == ex::summary_json(b, spec).dump();
  });
  const auto good = static_cast<std::size_t>(std::count(same.begin(), same.end(), 1));
  return {good == kReplays, std::to_string(good) + "/" + std::to_string(kReplays) + " replays byte-identical"};
}

std::set<std::set<ProcessId>> partition(const oracle::GroupingReport& r) {
  std::set<std::set<ProcessId>> out;
  for (const auto& [id, members] : r.groups) out.insert(std::set<ProcessId>(members.begin(), members.end()));
  return out;
}

std::string show(const std::set<std::set<ProcessId>>& p) {
  std::string s = "{";
  for (const auto& part : p) {
    s += s.size() > 1 ? ",{" : "{";
    for (ProcessId v : part) s += std::to_string(v) + (v == *part.rbegin() ? "" : ",");
    s += "}";
  }
  return s + "}";
}

Result crit_named() {
  Result r;
  const Graph p5 = make_path(5), c6 = make_cycle(6);
  const std::set<std::set<ProcessId>> p5_want{{1, 2, 3}, {4, 5}};
  std::set<std::string> p5_seen, c6_seen;
  bool p5_ok = true, c6_ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ip = kgrouping::make_instance(p5, 2);
    const auto op = ex::execute(ip, p5, ex::zeroed_configuration(ip, p5), DaemonPolicy::random(0.5, seed),
                                default_budget(p5));
    p5_seen.insert(show(partition(op.report)));
    p5_ok = p5_ok && converged(op) && partition(op.report) == p5_want;

    const auto ic = kgrouping::make_instance(c6, 2);
    const auto oc = ex::execute(ic, c6, ex::zeroed_configuration(ic, c6), DaemonPolicy::random(0.5, seed),
                                default_budget(c6));
    const auto pc = partition(oc.report);
    c6_seen.insert(show(pc));
    bool arcs = pc.size() == 2;
    for (const auto& part : pc) {
      const std::vector<ProcessId> ids(part.begin(), part.end());
      arcs = arcs && ids.size() == 3 && induced_diameter(c6, ids) == 2;
    }
    c6_ok = c6_ok && converged(oc) && arcs;
  }
  auto join = [](const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : " | ") + x;
    return out;
  };
  r.pass = p5_ok && c6_ok;
  r.detail = std::string("P5 ") + (p5_ok ? "ok " : "MISMATCH ") + join(p5_seen) + " (exhaustive min " +
             std::to_string(oracle::exhaustive_min_groups(p5, 2)) + "); C6 " + (c6_ok ? "ok " : "MISMATCH ") +
             join(c6_seen) + " (exhaustive min " + std::to_string(oracle::exhaustive_min_groups(c6, 2)) + ")";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string atlas_path;
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--atlas", atlas_path, "Connected graphs with up to 7 vertices (JSON lines)")->required();
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail; they do not affect the exit status");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  auto clock = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - clock).count();
    clock = now;
    return fmt(s) + "s";
  };

  std::map<int, Result> results;
  std::vector<Run> randoms, sweeps;
  std::vector<Campaign> camps;
  std::vector<Run> camp_runs;
  if (wanted(1) || wanted(2) || wanted(4) || wanted(5) || wanted(6) || wanted(8)) {
    randoms = random_runs();
    std::cerr << "random runs " << elapsed() << '\n';
  }
  if (wanted(2) || wanted(3) || wanted(4) || wanted(5) || wanted(6) || wanted(8)) {
    sweeps = sweep_runs();
    std::cerr << "sweep runs " << elapsed() << '\n';
  }
  if (wanted(7) || wanted(8)) {
    camps = campaigns();
    for (const auto& c : camps) camp_runs.push_back(c.run);
    std::cerr << "campaigns " << elapsed() << '\n';
  }

  if (wanted(1)) results[1] = crit_convergence(randoms);
  if (wanted(2)) {
    results[2] = crit_group_bound({&randoms, &sweeps}, load_atlas(atlas_path));
    std::cerr << "small graphs " << elapsed() << '\n';
  }
  if (wanted(3)) results[3] = crit_rounds(sweeps);
  if (wanted(4)) results[4] = crit_iterations(sweeps, randoms);
  if (wanted(5)) results[5] = crit_boundaries({&randoms, &sweeps}, false);
  if (wanted(6)) results[6] = crit_boundaries({&randoms, &sweeps}, true);
  if (wanted(7)) results[7] = crit_faults(camps);
  if (wanted(8)) results[8] = crit_silence({&randoms, &sweeps, &camp_runs});
  if (wanted(9)) results[9] = crit_replay();
  if (wanted(10)) results[10] = crit_named();
  std::cerr << "checks " << elapsed() << '\n';

  int status = 0;
  for (const auto& [c, r] : results) {
    const bool expected = std::find(expect_fail.begin(), expect_fail.end(), c) != expect_fail.end();
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << r.detail
              << (expected && !r.pass ? " [known failure]" : "") << '\n';
    if (!r.pass && !expected) status = 1;
  }
  return status;
}
