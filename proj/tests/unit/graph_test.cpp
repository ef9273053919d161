#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "selfstab/graph.hpp"
#include "selfstab/state.hpp"

using namespace selfstab;
using Ids = std::vector<ProcessId>;

TEST_SUITE("graph") {
  TEST_CASE("neighbors on small paths and cycles") {
    const Graph p3 = make_path(3);
    CHECK(neighbors(p3, 2) == Ids{1, 3});
    CHECK(neighbors(p3, 1) == Ids{2});
    CHECK(neighbors(make_cycle(4), 1) == Ids{2, 4});
  }

  TEST_CASE("distances") {
    CHECK(dist(make_path(4), 1, 4) == 3);
    const Graph c6 = make_cycle(6);
    for (ProcessId v = 1; v <= 6; ++v) CHECK(dist(c6, v, v) == 0);
    CHECK(dist(c6, 1, 4) == testutil::bfs_hops(c6, 1)[3]);
    CHECK(dist(c6, 1, 4) == 3);
  }

  TEST_CASE("induced diameter") {
    const Graph p5 = make_path(5);
    CHECK(induced_diameter(p5, Ids{2, 3, 4}) == 2);
    CHECK(induced_diameter(make_path(3), Ids{1, 3}) == kInfinity);
    const Graph c6 = make_cycle(6);
    int expect = 0;
    for (ProcessId v = 1; v <= 6; ++v)
      for (int d : testutil::bfs_hops(c6, v)) expect = std::max(expect, d);
    CHECK(induced_diameter(c6, Ids{1, 2, 3, 4, 5, 6}) == static_cast<Hops>(expect));
    CHECK(expect == 3);
  }

  TEST_CASE("k-neighborhoods") {
    const Graph p4 = make_path(4);
    CHECK(k_neighborhood(p4, 3, 0) == Ids{3});
    CHECK(k_neighborhood(p4, 1, 2) == Ids{1, 2, 3});
    CHECK(k_neighborhood(make_cycle(6), 1, 2) == Ids{1, 2, 3, 5, 6});
  }

  TEST_CASE("metric and neighborhood properties on random graphs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Graph g = make_random_connected(12, 0.25, seed, true);
      const auto ids = Ids(g.vertices().begin(), g.vertices().end());
      for (ProcessId u : ids) {
        const auto oracle = testutil::bfs_hops(g, u);
        for (std::size_t j = 0; j < ids.size(); ++j) {
          const ProcessId v = ids[j];
          REQUIRE(dist(g, u, v) == static_cast<Hops>(oracle[j]));
          CHECK(dist(g, u, v) == dist(g, v, u));
          for (ProcessId w : ids) CHECK(dist(g, u, w) <= dist(g, u, v) + dist(g, v, w));
        }
        for (unsigned i = 0; i + 1 < g.size(); ++i) {
          const auto a = k_neighborhood(g, u, i), b = k_neighborhood(g, u, i + 1);
          CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
        CHECK(k_neighborhood(g, u, static_cast<unsigned>(g.size() - 1)) == ids);
      }
      Hops diam = 0;
      for (ProcessId u : ids)
        for (ProcessId v : ids) diam = std::max(diam, dist(g, u, v));
      CHECK(induced_diameter(g, ids) == diam);
    }
  }

  TEST_CASE("loading rejects bad graphs") {
    CHECK_THROWS_AS(parse_graph(R"({"vertices":[1,2,3],"edges":[[1,2]]})"), GraphError);
    CHECK_THROWS_AS(parse_graph(R"({"vertices":[1,1,2],"edges":[[1,2]]})"), GraphError);
    CHECK_THROWS_AS(parse_graph(R"({"vertices":[-1,2],"edges":[[-1,2]]})"), GraphError);
    const Graph g = parse_graph("5 9\n9 12\n");
    CHECK(g.size() == 3);
    CHECK(neighbors(g, 9) == Ids{5, 12});
    const Graph j = parse_graph(to_json(g));
    CHECK(j.edges() == g.edges());

    const auto path = std::filesystem::temp_directory_path() / "selfstab_graph_test.json";
    std::ofstream(path) << R"({"vertices":[3,7],"edges":[[3,7]]})";
    CHECK(load_graph(path).size() == 2);
    std::filesystem::remove(path);
  }
}

TEST_SUITE("runtime") {
  TEST_CASE("stores keep ranges and keyed arrays") {
    Schema s;
    const auto x = s.add_scalar("x", {0, 4}, false);
    const auto y = s.add_scalar("y", {0, 4}, true);
    const auto dom = s.add_set("dom");
    const auto arr = s.add_array("arr", {0, 3}, false, dom);
    VarStore st = s.make_store();
    StoreWriter w(s, st);
    CHECK_THROWS_AS(w.set(x, 9), SchemaError);
    w.set(y, 9);
    CHECK_FALSE(st.get(y).has_value());
    w.set(dom, IdSet{5, 2, 5});
    CHECK(st.get(dom) == IdSet{2, 5});
    w.assign(arr, [](ProcessId key) { return Value(key == 2 ? 1 : 7); });
    CHECK(st.get(arr, 2) == Value(1));
    CHECK_FALSE(st.get(arr, 5).has_value());  // out of range becomes ⊥
    w.set(dom, IdSet{5});
    CHECK_FALSE(st.get(arr, 2).has_value());  // pruned with the domain
    CHECK(st.get(arr).empty());
  }
}
