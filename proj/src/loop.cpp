#include "selfstab/loop.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace selfstab::loop {

LoopVars declare(Schema& schema) {
  LoopVars v;
  v.cl = schema.add_scalar("cl", Range{0, 4}, false);
  v.mode = schema.add_scalar("mode", Range{kModeA, kModeP}, false);
  v.rst = schema.add_scalar("rst", Range{0, 1}, false);
  return v;
}

bool illegal_pair(std::int64_t parent_cl, std::int64_t child_cl) {
  static constexpr std::array<std::pair<int, int>, 10> kPairs{
      {{1, 3}, {1, 4}, {2, 0}, {2, 1}, {2, 3}, {2, 4}, {3, 0}, {3, 1}, {4, 1}, {4, 2}}};
  return std::find(kPairs.begin(), kPairs.end(), std::pair<int, int>(static_cast<int>(parent_cl),
                                                                      static_cast<int>(child_cl))) != kPairs.end();
}

bool down_ok(const View& view, const bfs::BfsVars& bfs, const LoopVars& vars) {
  const std::int64_t cl = view.self().num(vars.cl);
  for (VertexIndex u : bfs::par(view, bfs))
    if (view.at(u).num(vars.cl) != cl + 1) return false;
  for (VertexIndex u : bfs::chi(view, bfs))
    if (view.at(u).num(vars.cl) != cl) return false;
  return true;
}

bool up_ok(const View& view, const bfs::BfsVars& bfs, const LoopVars& vars) {
  const std::int64_t cl = view.self().num(vars.cl);
  for (VertexIndex u : bfs::par(view, bfs))
    if (view.at(u).num(vars.cl) != cl) return false;
  for (VertexIndex u : bfs::chi(view, bfs))
    if (view.at(u).num(vars.cl) != (cl + 1) % 5) return false;
  return true;
}

namespace {

bool same_value(const VarStore& s, const VarRef& a, const VarRef& b) {
  if (auto x = std::get_if<ScalarVar>(&a)) return s.get(*x) == s.get(std::get<ScalarVar>(b));
  if (auto x = std::get_if<SetVar>(&a)) return s.get(*x) == s.get(std::get<SetVar>(b));
  return s.get(std::get<ArrayVar>(a)) == s.get(std::get<ArrayVar>(b));
}

void copy_value(StoreWriter& w, const CopyPair& p) {
  const VarStore& s = w.current();
  if (auto x = std::get_if<ScalarVar>(&p.out)) {
    w.set(std::get<ScalarVar>(p.copy), s.get(*x));
  } else if (auto x = std::get_if<SetVar>(&p.out)) {
    w.set(std::get<SetVar>(p.copy), s.get(*x));
  } else {
    w.set(std::get<ArrayVar>(p.copy), s.get(std::get<ArrayVar>(p.out)));
  }
}

bool contains(const std::vector<VarRef>& vs, const VarRef& v) { return std::find(vs.begin(), vs.end(), v) != vs.end(); }

std::vector<VarRef> collect(const std::vector<Action>& actions, bool writes) {
  std::vector<VarRef> out;
  for (const auto& a : actions)
    for (const auto& v : writes ? a.writes : a.reads)
      if (!contains(out, v)) out.push_back(v);
  return out;
}

void validate(const Schema& schema, const bfs::BfsVars& bfs, const BaseAlgorithmBinding& b) {
  if (b.A.empty() || b.P.empty()) throw CompositionError("base algorithm and initializer need actions");
  if (!b.E) throw CompositionError("error predicate missing");
  const auto out_A = collect(b.A, true);
  const auto out_P = collect(b.P, true);
  for (const auto& v : out_A)
    if (contains(out_P, v))
      throw CompositionError("variable '" + std::string(schema.name(v)) + "' is written by both A and P");
  const std::vector<VarRef> ambient{bfs.root, bfs.lvl, bfs.parent};
  for (const auto& v : collect(b.P, false))
    if (!contains(out_P, v) && !contains(ambient, v))
      throw CompositionError("P reads input variable '" + std::string(schema.name(v)) + "'");
  for (const auto& v : b.E_reads)
    if (contains(out_A, v))
      throw CompositionError("E reads output variable '" + std::string(schema.name(v)) + "' of A");
  if (b.copies.empty()) throw CompositionError("no copy pairs");
  for (const auto& p : b.copies) {
    if (p.out.index() != p.copy.index()) throw CompositionError("copy pair mixes variable kinds");
    const VarDecl& a = schema.decl(p.out);
    const VarDecl& c = schema.decl(p.copy);
    if (!contains(out_A, p.out)) throw CompositionError("'" + a.name + "' is not an output of A");
    if (contains(out_A, p.copy)) throw CompositionError("copying variable '" + c.name + "' is written by A");
    if (a.range != c.range || a.nullable != c.nullable || a.keyed_by != c.keyed_by)
      throw CompositionError("'" + a.name + "' and '" + c.name + "' differ in range");
  }
}

// Every u in N_v^1 (v included) satisfies pred.
template <typename F>
bool closed_all(const View& view, F pred) {
  if (!pred(view.self())) return false;
  for (VertexIndex u : view.neighbors())
    if (!pred(view.at(u))) return false;
  return true;
}

template <typename F>
bool any_neighbor(const View& view, F pred) {
  for (VertexIndex u : view.neighbors())
    if (pred(view.at(u))) return true;
  return false;
}

bool enabled(const std::vector<Action>& actions, const View& view) {
  for (const auto& a : actions)
    if (a.guard(view)) return true;
  return false;
}

void run_first(const std::vector<Action>& actions, const View& view, StoreWriter& w) {
  for (const auto& a : actions)
    if (a.guard(view)) {
      a.statement(view, w);
      return;
    }
}

}  // namespace

Composition compose(std::shared_ptr<const Schema> schema, const bfs::Layer& bfs_layer, const LoopVars& vars,
                    BaseAlgorithmBinding binding) {
  const bfs::BfsVars bv = bfs_layer.vars;
  validate(*schema, bv, binding);

  auto A = std::make_shared<const std::vector<Action>>(binding.A);
  auto P = std::make_shared<const std::vector<Action>>(binding.P);
  auto bfs_actions = std::make_shared<const std::vector<Action>>(bfs_layer.actions);
  auto E = binding.E;
  auto copies = binding.copies;
  const LoopVars lv = vars;

  auto cl = [lv](const VarStore& s) { return s.num(lv.cl); };
  auto mode = [lv](const VarStore& s) { return s.num(lv.mode); };
  auto rst = [lv](const VarStore& s) { return s.num(lv.rst); };
  auto par_has = [bv](const View& view, auto pred) {
    for (VertexIndex u : bfs::par(view, bv))
      if (pred(view.at(u))) return true;
    return false;
  };
  auto par_all = [bv](const View& view, auto pred) {
    for (VertexIndex u : bfs::par(view, bv))
      if (!pred(view.at(u))) return false;
    return true;
  };
  auto chi_has = [bv](const View& view, auto pred) {
    for (VertexIndex u : bfs::chi(view, bv))
      if (pred(view.at(u))) return true;
    return false;
  };
  auto chi_all = [bv](const View& view, auto pred) {
    for (VertexIndex u : bfs::chi(view, bv))
      if (!pred(view.at(u))) return false;
    return true;
  };

  std::vector<VarRef> loop_vars{lv.cl, lv.mode, lv.rst};
  std::vector<VarRef> tree{bv.parent};
  auto with = [](std::vector<VarRef> a, const std::vector<VarRef>& b) {
    for (const auto& x : b)
      if (!contains(a, x)) a.push_back(x);
    return a;
  };

  std::vector<Action> acts;
  auto add = [&](std::string label, Guard g, Statement s, std::vector<VarRef> reads, std::vector<VarRef> writes) {
    acts.push_back(Action{std::move(label), std::move(g), std::move(s), std::move(reads), std::move(writes)});
  };

  add("L1", [bfs_actions](const View& v) { return enabled(*bfs_actions, v); },
      [bfs_actions](const View& v, StoreWriter& w) { run_first(*bfs_actions, v, w); },
      {bv.root, bv.lvl, bv.parent}, {bv.root, bv.lvl, bv.parent});

  add("L2",
      [=](const View& v) {
        const auto c = cl(v.self());
        return c != 0 && c != 3 && c != 4 && rst(v.self()) == 1;
      },
      [lv](const View&, StoreWriter& w) { w.set(lv.cl, 0); }, loop_vars, {lv.cl});

  add("L3",
      [=](const View& v) {
        const auto c = cl(v.self());
        return (c == 1 || c == 2) && par_has(v, [&](const VarStore& u) { return cl(u) == 0; });
      },
      [lv](const View&, StoreWriter& w) { w.set(lv.cl, 0); }, with(loop_vars, tree), {lv.cl});

  add("L4",
      [=](const View& v) {
        const auto c = cl(v.self());
        return (c == 3 || c == 4) && par_has(v, [&](const VarStore& u) { return cl(u) == 0; });
      },
      [lv](const View&, StoreWriter& w) {
        w.set(lv.cl, 0);
        w.set(lv.rst, 1);
      },
      with(loop_vars, tree), {lv.cl, lv.rst});

  add("L5",
      [=](const View& v) {
        return mode(v.self()) == kModeA && closed_all(v, [&](const VarStore& u) { return cl(u) != 4; }) && E(v);
      },
      [lv](const View&, StoreWriter& w) {
        w.set(lv.mode, kModeP);
        w.set(lv.rst, 1);
      },
      with(loop_vars, binding.E_reads), {lv.mode, lv.rst});

  add("L6",
      [=](const View& v) {
        return mode(v.self()) == kModeA && cl(v.self()) != 4 &&
               any_neighbor(v, [&](const VarStore& u) { return mode(u) == kModeP; });
      },
      [lv](const View&, StoreWriter& w) {
        w.set(lv.mode, kModeP);
        w.set(lv.rst, 1);
      },
      loop_vars, {lv.mode, lv.rst});

  add("L7",
      [=](const View& v) {
        return closed_all(v, [&](const VarStore& u) { return mode(u) == kModeA && cl(u) != 4; }) && enabled(*A, v);
      },
      [A, lv](const View& v, StoreWriter& w) {
        run_first(*A, v, w);
        w.set(lv.rst, 1);
      },
      with(loop_vars, collect(binding.A, false)), with({lv.rst}, collect(binding.A, true)));

  add("L8",
      [=](const View& v) {
        return closed_all(v, [&](const VarStore& u) { return mode(u) == kModeP && cl(u) != 4; }) && enabled(*P, v);
      },
      [P, lv](const View& v, StoreWriter& w) {
        run_first(*P, v, w);
        w.set(lv.rst, 1);
      },
      with(loop_vars, collect(binding.P, false)), with({lv.rst}, collect(binding.P, true)));

  add("L9",
      [=](const View& v) {
        const auto c = cl(v.self());
        return chi_has(v, [&](const VarStore& u) { return illegal_pair(c, cl(u)); });
      },
      [lv](const View&, StoreWriter& w) {
        w.set(lv.cl, 0);
        w.set(lv.rst, 1);
      },
      with(loop_vars, tree), {lv.cl, lv.rst});

  add("L10",
      [=](const View& v) {
        return rst(v.self()) == 0 && chi_has(v, [&](const VarStore& u) { return rst(u) == 1; });
      },
      [lv](const View&, StoreWriter& w) { w.set(lv.rst, 1); }, with(loop_vars, tree), {lv.rst});

  add("L11",
      [=](const View& v) {
        return rst(v.self()) == 1 && par_all(v, [&](const VarStore& u) { return rst(u) == 1; }) &&
               chi_all(v, [&](const VarStore& u) { return rst(u) == 0; });
      },
      [lv](const View&, StoreWriter& w) { w.set(lv.rst, 0); }, with(loop_vars, tree), {lv.rst});

  add("L12",
      [=](const View& v) {
        const auto c = cl(v.self());
        return (c == 0 || c == 2) && rst(v.self()) == 0 && down_ok(v, bv, lv);
      },
      [=](const View& v, StoreWriter& w) { w.set(lv.cl, cl(v.self()) + 1); }, with(loop_vars, tree), {lv.cl});

  add("L13", [=](const View& v) { return cl(v.self()) == 1 && up_ok(v, bv, lv); },
      [lv](const View&, StoreWriter& w) { w.set(lv.cl, 2); }, with(loop_vars, tree), {lv.cl});

  std::vector<VarRef> copy_writes{lv.cl};
  std::vector<VarRef> copy_reads = with(loop_vars, tree);
  for (const auto& p : copies) {
    copy_writes.push_back(p.copy);
    copy_reads = with(copy_reads, {p.out, p.copy});
  }
  add("L14",
      [=](const View& v) {
        const VarStore& s = v.self();
        if (cl(s) != 3 || mode(s) != kModeA) return false;
        if (!chi_all(v, [&](const VarStore& u) { return cl(u) != 2; })) return false;
        return !copies_agree(s, copies) || any_neighbor(v, [&](const VarStore& u) { return cl(u) == 4; });
      },
      [=](const View&, StoreWriter& w) {
        w.set(lv.cl, 4);
        for (const auto& p : copies) copy_value(w, p);
      },
      copy_reads, copy_writes);

  add("L15",
      [=](const View& v) {
        const VarStore& s = v.self();
        return cl(s) == 3 && mode(s) == kModeP && chi_all(v, [&](const VarStore& u) { return cl(u) != 2; });
      },
      [lv](const View&, StoreWriter& w) {
        w.set(lv.cl, 4);
        w.set(lv.mode, kModeA);
      },
      with(loop_vars, tree), {lv.cl, lv.mode});

  add("L16",
      [=](const View& v) {
        return cl(v.self()) == 4 && up_ok(v, bv, lv) && !any_neighbor(v, [&](const VarStore& u) {
                 const auto c = cl(u);
                 return c != 0 && c != 4;
               });
      },
      [lv](const View&, StoreWriter& w) { w.set(lv.cl, 0); }, with(loop_vars, tree), {lv.cl});

  Composition out{AlgorithmSpec{"loop", schema, std::move(acts)},
                  schema,
                  bv,
                  lv,
                  std::move(binding),
                  {},
                  {}};
  out.A = AlgorithmSpec{"A", schema, out.binding.A};
  out.P = AlgorithmSpec{"P", schema, out.binding.P};
  return out;
}

bool copies_agree(const VarStore& s, const std::vector<CopyPair>& copies) {
  for (const auto& p : copies)
    if (!same_value(s, p.out, p.copy)) return false;
  return true;
}

Configuration copy_shift(const Configuration& cfg, const Schema& schema, const std::vector<CopyPair>& copies) {
  Configuration out = cfg;
  for (auto& s : out.stores) {
    StoreWriter w(schema, s);
    for (const auto& p : copies) copy_value(w, p);
  }
  return out;
}

bool any_error(const Graph& g, const Configuration& cfg, const Composition& c) {
  for (VertexIndex v = 0; v < g.size(); ++v)
    if (c.binding.E(View(g, cfg, v))) return true;
  return false;
}

bool check_Cgoal(const Graph& g, const Configuration& cfg, const Composition& c) {
  for (VertexIndex v = 0; v < g.size(); ++v) {
    const View view(g, cfg, v);
    if (!copies_agree(cfg[v], c.binding.copies)) return false;
    if (c.A.enabled(view)) return false;
  }
  return !any_error(g, cfg, c);
}

bool check_Cfin(const Graph& g, const Configuration& cfg, const Composition& c) {
  for (VertexIndex v = 0; v < g.size(); ++v) {
    const VarStore& s = cfg[v];
    if (s.num(c.vars.mode) != kModeA || s.num(c.vars.cl) != 3 || s.num(c.vars.rst) != 0) return false;
  }
  return check_Cgoal(g, cfg, c);
}

}  // namespace selfstab::loop
