#include "selfstab/bfs.hpp"

#include <algorithm>
#include <memory>
#include <tuple>

namespace selfstab::bfs {

BfsVars declare(Schema& schema, std::size_t n) {
  BfsVars v;
  v.root = schema.add_scalar("root", kIdRange, false, true);
  v.lvl = schema.add_scalar("lvl", Range{0, static_cast<std::int64_t>(n)}, false);
  v.parent = schema.add_scalar("parent", kIdRange, true, true);
  return v;
}

namespace {

struct Claim {
  std::int64_t root;
  std::int64_t lvl;
  Value parent;
};

Claim best_claim(const View& view, const BfsVars& vars, std::size_t n) {
  Claim best{view.id(), 0, bot};
  // Neighbors are visited in increasing id order, so strict improvement keeps
  // the smallest identifier among equal (root, lvl) candidates.
  for (VertexIndex u : view.neighbors()) {
    const VarStore& s = view.at(u);
    const std::int64_t lvl = s.num(vars.lvl) + 1;
    if (lvl >= static_cast<std::int64_t>(n)) continue;
    const std::int64_t root = s.num(vars.root);
    if (std::tie(root, lvl) < std::tie(best.root, best.lvl)) best = Claim{root, lvl, view.id_of(u)};
  }
  return best;
}

bool consistent(const View& view, const BfsVars& vars, const Claim& c) {
  const VarStore& s = view.self();
  return s.num(vars.root) == c.root && s.num(vars.lvl) == c.lvl && s.get(vars.parent) == c.parent;
}

}  // namespace

Layer make_layer(const BfsVars& vars, std::size_t n) {
  Layer layer{vars, n, {}};
  Action fix;
  fix.label = "B1";
  fix.guard = [vars, n](const View& view) { return !consistent(view, vars, best_claim(view, vars, n)); };
  fix.statement = [vars, n](const View& view, StoreWriter& w) {
    const Claim c = best_claim(view, vars, n);
    w.set(vars.root, c.root);
    w.set(vars.lvl, c.lvl);
    w.set(vars.parent, c.parent);
  };
  fix.reads = {vars.root, vars.lvl, vars.parent};
  fix.writes = {vars.root, vars.lvl, vars.parent};
  layer.actions.push_back(std::move(fix));
  return layer;
}

AlgorithmSpec make_algorithm(std::size_t n) {
  auto schema = std::make_shared<Schema>();
  const BfsVars vars = declare(*schema, n);
  Layer layer = make_layer(vars, n);
  return AlgorithmSpec{"bfs", schema, std::move(layer.actions)};
}

std::vector<VertexIndex> par(const View& view, const BfsVars& vars) {
  const Value p = view.self().get(vars.parent);
  if (!p) return {};
  for (VertexIndex u : view.neighbors())
    if (view.id_of(u) == *p) return {u};
  return {};
}

std::vector<VertexIndex> chi(const View& view, const BfsVars& vars) {
  std::vector<VertexIndex> out;
  const Value me = view.id();
  for (VertexIndex u : view.neighbors())
    if (view.at(u).get(vars.parent) == me) out.push_back(u);
  return out;
}

bool legitimate(const Graph& g, const Configuration& cfg, const BfsVars& vars) {
  const VertexIndex r = 0;  // smallest identifier
  for (VertexIndex v = 0; v < g.size(); ++v) {
    const VarStore& s = cfg[v];
    if (s.num(vars.root) != g.id_of(r)) return false;
    const Hops d = g.distance(r, v);
    if (s.num(vars.lvl) != static_cast<std::int64_t>(d)) return false;
    if (v == r) {
      if (s.get(vars.parent)) return false;
      continue;
    }
    std::optional<VertexIndex> expect;
    for (VertexIndex u : g.adjacent(v))
      if (g.distance(r, u) + 1 == d) {
        expect = u;
        break;
      }
    if (s.get(vars.parent) != Value(g.id_of(*expect))) return false;
  }
  return true;
}

}  // namespace selfstab::bfs
