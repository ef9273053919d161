#include <doctest.h>

#include <map>
#include <set>

#include "selfstab/experiment.hpp"
#include "selfstab/kgrouping.hpp"
#include "selfstab/loop.hpp"
#include "selfstab/oracle.hpp"
#include "selfstab/runtime.hpp"

using namespace selfstab;
using kgrouping::GroupVars;

namespace {

RunOptions quiet() {
  RunOptions o;
  o.record_steps = false;
  return o;
}

// BFS alone, then Init alone, both to silence.
Configuration after_init(const kgrouping::Instance& inst, const Graph& g) {
  const AlgorithmSpec bfs{"bfs", inst.schema, bfs::make_layer(inst.bfs(), g.size()).actions};
  auto res = run(g, make_configuration(*inst.schema, g), bfs, DaemonPolicy::synchronous(), default_budget(g), quiet());
  REQUIRE(bfs::legitimate(g, res.final, inst.bfs()));
  res = run(g, res.final, inst.loop.P, DaemonPolicy::random(0.5, 1), default_budget(g), quiet());
  REQUIRE(res.verdict == Verdict::terminated);
  return res.final;
}

Configuration final_config(const kgrouping::Instance& inst, const Graph& g, std::uint64_t seed) {
  const auto res = run(g, experiment::random_configuration(inst, g, seed), inst.spec(),
                       DaemonPolicy::random(0.5, seed), default_budget(g), quiet());
  REQUIRE(res.verdict == Verdict::terminated);
  return res.final;
}

std::vector<std::int64_t> column(const Configuration& c, ScalarVar x) {
  std::vector<std::int64_t> out;
  for (const auto& s : c.stores) out.push_back(s.num(x));
  return out;
}

std::set<std::set<ProcessId>> init_groups(const Graph& g, const Configuration& c, const GroupVars& v) {
  std::map<std::int64_t, std::set<ProcessId>> parts;
  for (VertexIndex i = 0; i < g.size(); ++i) parts[c[i].num(v.in_group)].insert(g.id_of(i));
  std::set<std::set<ProcessId>> out;
  for (auto& [id, m] : parts) out.insert(m);
  return out;
}

void set_domain(const kgrouping::Instance& inst, Configuration& c, VertexIndex i, IdSet d) {
  StoreWriter(*inst.schema, c[i]).set(inst.vars.domain, std::move(d));
}

void put(const kgrouping::Instance& inst, Configuration& c, VertexIndex i, ArrayVar x, ProcessId key, Value val) {
  SlotMap m = c[i].get(x);
  m.put(key, val);
  StoreWriter(*inst.schema, c[i]).set(x, std::move(m));
}

}  // namespace

TEST_SUITE("kgrouping") {
  TEST_CASE("k = 0 is rejected") {
    CHECK_THROWS_AS(kgrouping::make_instance(make_path(3), 0), kgrouping::ParameterError);
    CHECK_THROWS_AS(kgrouping::make_instance(make_path(3), -2), kgrouping::ParameterError);
  }

  TEST_CASE("Share") {
    const Graph p3 = make_path(3);
    const auto inst = kgrouping::make_instance(p3, 1);
    const auto& v = inst.vars;
    Configuration c = make_configuration(*inst.schema, p3);
    for (VertexIndex i = 0; i < 3; ++i) set_domain(inst, c, i, {1, 2, 3});
    CHECK(kgrouping::share(View(p3, c, 0), v, 1, v.groups, 42) == Value(42));
    put(inst, c, 0, v.dist, 3, 2);
    CHECK_FALSE(kgrouping::share(View(p3, c, 0), v, 3, v.groups, 42).has_value());
    put(inst, c, 1, v.dist, 3, 1);
    put(inst, c, 1, v.groups, 3, 3);
    CHECK(kgrouping::share(View(p3, c, 0), v, 3, v.groups, 42) == Value(3));

    // After stabilization process 1 learns 3's group through 2.
    const auto fin = final_config(inst, p3, 4);
    const auto g3 = fin[2].num(v.in_group);
    CHECK(g3 != fin[0].num(v.in_group));
    CHECK(fin[0].get(v.groups, 3) == Value(g3));
    CHECK(kgrouping::share(View(p3, fin, 0), v, 3, v.groups, bot) == Value(g3));
  }

  TEST_CASE("Min") {
    const Graph e({3, 7}, {{3, 7}});
    const auto inst = kgrouping::make_instance(e, 2);
    const auto& v = inst.vars;
    Configuration c = make_configuration(*inst.schema, e);
    for (VertexIndex i = 0; i < 2; ++i) set_domain(inst, c, i, {3, 7});
    // Singleton groups.
    c[0].put(v.in_group, 3);
    c[1].put(v.in_group, 7);
    CHECK(kgrouping::min_macro(View(e, c, 0), v, v.stamp1, 7, true) == Value(3));
    CHECK_FALSE(kgrouping::min_macro(View(e, c, 0), v, v.stamp1, 7, false).has_value());

    // Group {3,7} with Q only at 7: iterate x[7] <- Min to a fixed point.
    c[0].put(v.in_group, 3);
    c[1].put(v.in_group, 3);
    put(inst, c, 0, v.in_groupD, 7, 1);
    put(inst, c, 1, v.in_groupD, 7, 0);
    put(inst, c, 0, v.in_groupD, 3, 0);
    put(inst, c, 1, v.in_groupD, 3, 1);
    for (int round = 0; round < 4; ++round) {
      const Value a = kgrouping::min_macro(View(e, c, 0), v, v.stamp1, 7, false);
      const Value b = kgrouping::min_macro(View(e, c, 1), v, v.stamp1, 7, true);
      put(inst, c, 0, v.stamp1, 7, a);
      put(inst, c, 1, v.stamp1, 7, b);
    }
    CHECK(c[0].get(v.stamp1, 7) == Value(7));
    CHECK(c[1].get(v.stamp1, 7) == Value(7));
  }

  TEST_CASE("Distance") {
    const Graph p5 = make_path(5);
    const auto inst = kgrouping::make_instance(p5, 2);
    const auto& v = inst.vars;
    const Configuration c = make_configuration(*inst.schema, p5);
    CHECK(kgrouping::distance_macro(View(p5, c, 2), 3, v.mergeD, {}) == Value(0));
    CHECK_FALSE(kgrouping::distance_macro(View(p5, c, 2), 1, v.mergeD, {}).has_value());

    // Fixed point over a same-group set equals the induced-subgraph distance.
    const std::vector<ProcessId> members{2, 3, 4, 5};
    Configuration d = make_configuration(*inst.schema, p5);
    for (VertexIndex i = 0; i < 5; ++i) set_domain(inst, d, i, {1, 2, 3, 4, 5});
    for (int it = 0; it < 6; ++it) {
      Configuration next = d;
      for (ProcessId id : members) {
        const VertexIndex i = p5.index_of(id);
        std::vector<VertexIndex> X;
        for (VertexIndex w : p5.adjacent(i))
          if (std::find(members.begin(), members.end(), p5.id_of(w)) != members.end()) X.push_back(w);
        put(inst, next, i, v.mergeD, 5, kgrouping::distance_macro(View(p5, d, i), 5, v.mergeD, X));
      }
      d = next;
    }
    for (ProcessId id : members)
      CHECK(d[p5.index_of(id)].get(v.mergeD, 5) == Value(dist(p5, id, 5)));
    CHECK_FALSE(d[0].get(v.mergeD, 5).has_value());
  }

  TEST_CASE("Init on P5 with k = 2") {
    const Graph p5 = make_path(5);
    const auto inst = kgrouping::make_instance(p5, 2);
    const auto c = after_init(inst, p5);
    CHECK(column(c, inst.vars.height) == std::vector<std::int64_t>{0, 1, 0, 1, 0});
    CHECK(init_groups(p5, c, inst.vars) == std::set<std::set<ProcessId>>{{1}, {2, 3}, {4, 5}});
    for (VertexIndex i = 0; i < 5; ++i)
      CHECK_FALSE(kgrouping::eval_E(View(p5, c, i), inst.bfs(), inst.vars, 2));
  }

  TEST_CASE("Init on a single edge with k = 2") {
    // Leaf 2 has height 0 and root 1 has (0 + 1) mod 2 = 1 = floor(k/2), so 2
    // joins its parent's group.
    const Graph e = make_path(2);
    const auto inst = kgrouping::make_instance(e, 2);
    const auto c = after_init(inst, e);
    CHECK(column(c, inst.vars.height) == std::vector<std::int64_t>{1, 0});
    CHECK(init_groups(e, c, inst.vars) == std::set<std::set<ProcessId>>{{1, 2}});
  }

  TEST_CASE("Init heights cycle through floor(k/2) + 1 values") {
    const Graph p7 = make_path(7);
    const auto inst = kgrouping::make_instance(p7, 4);
    const auto c = after_init(inst, p7);
    CHECK(column(c, inst.vars.height) == std::vector<std::int64_t>{0, 2, 1, 0, 2, 1, 0});
    CHECK(init_groups(p7, c, inst.vars) == std::set<std::set<ProcessId>>{{1}, {2, 3, 4}, {5, 6, 7}});
  }

  TEST_CASE("Init yields few groups and no errors on random graphs") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const Graph g = make_random_connected(5 + seed % 20, 0.15, seed, true);
      const int k = 1 + static_cast<int>(seed % 6);
      const auto inst = kgrouping::make_instance(g, k);
      const auto c = after_init(inst, g);
      const auto parts = init_groups(g, c, inst.vars);
      CHECK(static_cast<double>(parts.size()) <= 2.0 * static_cast<double>(g.size()) / k + 1.0);
      for (const auto& part : parts)
        CHECK(induced_diameter(g, std::vector<ProcessId>(part.begin(), part.end())) <= static_cast<Hops>(k));
      CHECK_FALSE(loop::any_error(g, c, inst.loop));
    }
  }

  TEST_CASE("E detects targeted corruptions") {
    const Graph g = make_random_connected(10, 0.3, 7, true);
    const auto inst = kgrouping::make_instance(g, 2);
    const auto& v = inst.vars;
    const auto fin = final_config(inst, g, 5);
    REQUIRE_FALSE(loop::any_error(g, fin, inst.loop));

    for (VertexIndex i = 0; i < g.size(); ++i) {
      auto bad = fin;
      bad[i].put(v.in_group, g.id_of(g.size() - 1) + 1000);
      bool near = false;
      for (VertexIndex w = 0; w < g.size(); ++w)
        if (g.distance(i, w) <= 1 && kgrouping::eval_E(View(g, bad, w), inst.bfs(), v, 2)) near = true;
      CHECK(near);
    }

    int tried = 0;
    for (VertexIndex i = 0; i < g.size(); ++i)
      for (ProcessId u : fin[i].get(v.domain)) {
        if (u == g.id_of(i)) continue;
        auto bad = fin;
        put(inst, bad, i, v.in_stampON, u, 1);
        put(inst, bad, i, v.in_stamp1, u, bot);
        put(inst, bad, i, v.in_stamp2, u, bot);
        put(inst, bad, i, v.in_stampD, u, bot);
        CHECK(kgrouping::eval_E(View(g, bad, i), inst.bfs(), v, 2));
        ++tried;
      }
    CHECK(tried > 0);
  }

  TEST_CASE("Merge guards are staged") {
    const Graph p3 = make_path(3);
    const auto inst = kgrouping::make_instance(p3, 3);
    const auto acts = kgrouping::merge_actions(inst.vars, 3);
    REQUIRE(acts.size() == 13);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      CHECK(acts[i].label == "M" + std::to_string(i + 1));
      for (std::size_t j = i + 1; j < acts.size(); ++j)
        for (const auto& w : acts[j].writes) {
          INFO(acts[i].label << " reads " << inst.schema->name(w) << " written by " << acts[j].label);
          CHECK(std::find(acts[i].reads.begin(), acts[i].reads.end(), w) == acts[i].reads.end());
        }
    }
    CHECK(kgrouping::init_actions(inst.bfs(), inst.vars, 3).size() == 9);
  }

  TEST_CASE("named instances") {
    const Graph p5 = make_path(5);
    const auto ip = kgrouping::make_instance(p5, 2);
    const auto fp = final_config(ip, p5, 1);
    const auto rp = oracle::check_Lk(p5, fp, ip.vars.group, 2);
    CHECK(rp.verdict);
    CHECK(rp.group_count == 2);

    const Graph c6 = make_cycle(6);
    const auto ic = kgrouping::make_instance(c6, 2);
    const auto fc = final_config(ic, c6, 1);
    CHECK(oracle::check_Lk(c6, fc, ic.vars.group, 2).verdict);
  }
}
