#include "selfstab/kgrouping.hpp"

#include <algorithm>
#include <optional>
#include <utility>

namespace selfstab::kgrouping {

GroupVars declare(Schema& schema, int k) {
  const Range dists{0, 2 * static_cast<std::int64_t>(k)};
  const Range flags{0, 1};
  GroupVars g;
  g.domain = schema.add_set("domain");
  g.height = schema.add_scalar("height", Range{0, k / 2}, false);
  g.initGroup = schema.add_scalar("initGroup", kIdRange, false, true);
  g.group = schema.add_scalar("group", kIdRange, false, true);
  g.dist = schema.add_array("dist", dists, false, g.domain);
  g.groupD = schema.add_array("groupD", dists, false, g.domain);
  g.mergeD = schema.add_array("mergeD", dists, false, g.domain);
  g.stampD = schema.add_array("stampD", dists, false, g.domain);
  g.border = schema.add_array("border", kIdRange, true, g.domain);
  g.far = schema.add_array("far", kIdRange, true, g.domain);
  g.target = schema.add_array("target", kIdRange, true, g.domain);
  g.stamp1 = schema.add_array("stamp1", kIdRange, true, g.domain);
  g.stamp2 = schema.add_array("stamp2", kIdRange, true, g.domain);
  g.groups = schema.add_array("groups", kIdRange, true, g.domain);
  g.merging = schema.add_array("merging", flags, false, g.domain);
  g.stampON = schema.add_array("stampON", flags, false, g.domain);
  g.prior = schema.add_array("prior", flags, false, g.domain);
  g.in_group = schema.add_scalar("in-group", kIdRange, false, true);
  g.in_groups = schema.add_array("in-groups", kIdRange, true, g.domain);
  g.in_groupD = schema.add_array("in-groupD", dists, false, g.domain);
  g.in_stampON = schema.add_array("in-stampON", flags, false, g.domain);
  g.in_prior = schema.add_array("in-prior", flags, false, g.domain);
  g.in_stamp1 = schema.add_array("in-stamp1", kIdRange, true, g.domain);
  g.in_stamp2 = schema.add_array("in-stamp2", kIdRange, true, g.domain);
  g.in_stampD = schema.add_array("in-stampD", dists, false, g.domain);
  return g;
}

std::vector<loop::CopyPair> copy_pairs(const GroupVars& g) {
  return {{g.group, g.in_group},     {g.groups, g.in_groups}, {g.groupD, g.in_groupD}, {g.stampON, g.in_stampON},
          {g.prior, g.in_prior},     {g.stamp1, g.in_stamp1}, {g.stamp2, g.in_stamp2}, {g.stampD, g.in_stampD}};
}

Value share(const View& view, const GroupVars& g, ProcessId u, ArrayVar x, Value own) {
  if (u == view.id()) return own;
  const Value dv = view.self().get(g.dist, u);
  if (!dv) return bot;
  Value best = bot;
  for (VertexIndex w : view.neighbors()) {
    const VarStore& s = view.at(w);
    const Value dw = s.get(g.dist, u);
    if (dw && *dw + 1 == *dv) best = min_value(best, s.get(x, u));
  }
  return best;
}

Value min_macro(const View& view, const GroupVars& g, ArrayVar x, ProcessId key, bool q) {
  const VarStore& self = view.self();
  const std::int64_t l = self.num(g.in_group);
  Value w = bot;
  for (VertexIndex u : view.neighbors()) {
    const VarStore& s = view.at(u);
    if (s.num(g.in_group) != l) continue;
    const Value c = s.get(x, key);
    if (!c || *c < 0 || *c > 0xffffffffLL) continue;
    const auto id = static_cast<ProcessId>(*c);
    const Value mine = self.get(g.in_groupD, id);
    const Value theirs = s.get(g.in_groupD, id);
    if (mine && theirs && *mine == *theirs + 1) w = min_value(w, c);
  }
  return q ? min_value(Value(view.id()), w) : w;
}

Value distance_macro(const View& view, ProcessId u, ArrayVar x, std::span<const VertexIndex> X) {
  if (u == view.id()) return 0;
  Value best = bot;
  for (VertexIndex w : X) best = min_value(best, view.at(w).get(x, u));
  return plus_one(best);
}

Value dist_fn(const View& view, const GroupVars& g, ProcessId u) {
  if (u == view.id()) return 0;
  Value best = bot;
  for (VertexIndex w : view.neighbors()) {
    const VarStore& s = view.at(w);
    if (set_contains(s.get(g.domain), u)) best = min_value(best, s.get(g.dist, u));
  }
  return plus_one(best);
}

IdSet domain_fn(const View& view, const GroupVars& g, int k) {
  IdSet cand{view.id()};
  for (VertexIndex w : view.neighbors()) {
    const IdSet& d = view.at(w).get(g.domain);
    cand.insert(cand.end(), d.begin(), d.end());
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  IdSet out;
  for (ProcessId u : cand) {
    const Value d = dist_fn(view, g, u);
    if (d && *d <= k + 1) out.push_back(u);
  }
  return out;
}

std::int64_t height_fn(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k) {
  const std::int64_t mod = k / 2 + 1;
  std::int64_t h = 0;
  for (VertexIndex u : bfs::chi(view, b)) h = std::max(h, (view.at(u).num(g.height) + 1) % mod);
  return h;
}

ProcessId init_group_fn(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k) {
  const auto par = bfs::par(view, b);
  if (par.empty() || view.self().num(g.height) == k / 2) return view.id();
  return static_cast<ProcessId>(view.at(par.front()).num(g.initGroup));
}

namespace {

// Per-evaluation view of process v with the derived notations l_v, S_v,
// N_v(u), g_v(u) and lazily computed Merge functions.
class Local {
 public:
  Local(const View& view, const GroupVars& g, int k) : view_(view), g_(g), k_(k), self_(view.self()) {
    l_ = self_.num(g.in_group);
    for (VertexIndex w : view.neighbors())
      if (view.at(w).num(g.in_group) == l_) S_.push_back(w);
  }

  const View& view() const { return view_; }
  const VarStore& self() const { return self_; }
  ProcessId id() const { return view_.id(); }
  std::int64_t l() const { return l_; }
  const std::vector<VertexIndex>& S() const { return S_; }

  std::vector<VertexIndex> N(Value u) const {
    std::vector<VertexIndex> out;
    if (!u) return out;
    for (VertexIndex w : view_.neighbors())
      if (view_.at(w).num(g_.in_group) == *u) out.push_back(w);
    return out;
  }

  // w ∈ g_v(u)
  bool member(ProcessId w, Value u) const { return u && self_.get(g_.in_groups, w) == u; }

  bool in_cand(ProcessId u) const {
    if (u == l_) return false;
    return self_.get(g_.border, u) && !self_.get(g_.far, u) && !flag(self_.get(g_.in_stampON, u));
  }

  Value target() {
    if (!target_) {
      Value best = bot, best_prior = bot;
      for (ProcessId u : self_.get(g_.domain)) {
        if (!in_cand(u)) continue;
        best = min_value(best, u);
        if (flag(self_.get(g_.in_prior, u))) best_prior = min_value(best_prior, u);
      }
      target_ = best_prior ? best_prior : best;
    }
    return *target_;
  }

  bool merging() {
    if (!merging_) {
      const Value t = target();
      merging_ = t && self_.get(g_.target, static_cast<ProcessId>(*t)) == Value(l_) &&
                 !self_.get(g_.stampD, static_cast<ProcessId>(*t));
    }
    return *merging_;
  }

  // ∃w ∈ g_v(u): v.dist[w] = k+1
  bool far_from(ProcessId u) {
    if (!far_groups_) far_groups_ = groups_at(g_.dist);
    return std::binary_search(far_groups_->begin(), far_groups_->end(), static_cast<std::int64_t>(u));
  }

  // ∃w ∈ g_v(u): v.mergeD[w] = k+1
  bool split_from(ProcessId u) {
    if (!split_groups_) split_groups_ = groups_at(g_.mergeD);
    return std::binary_search(split_groups_->begin(), split_groups_->end(), static_cast<std::int64_t>(u));
  }

  bool detector(ProcessId u) {
    if (self_.get(g_.target, u) != Value(l_)) return false;
    return l_ <= static_cast<std::int64_t>(u) || target() != Value(u);
  }

  Value stamp1(ProcessId u) {
    if (detector(u)) return min_macro(view_, g_, g_.stamp1, u, split_from(u));
    if (flag(self_.get(g_.in_stampON, u))) return self_.get(g_.in_stamp1, u);
    return bot;
  }

  Value stampD(ProcessId u) {
    if (stamp1(u) == Value(id())) return 0;
    Value best = bot;
    for (VertexIndex w : S_) best = min_value(best, view_.at(w).get(g_.stampD, u));
    for (VertexIndex w : N(u)) best = min_value(best, view_.at(w).get(g_.stampD, static_cast<ProcessId>(l_)));
    return plus_one(best);
  }

  Value merge_dist(ProcessId u) {
    std::vector<VertexIndex> X = S_;
    const Value gu = self_.get(g_.in_groups, u);
    const auto other = N(member(u, l_) ? target() : gu);
    X.insert(X.end(), other.begin(), other.end());
    return distance_macro(view_, u, g_.mergeD, X);
  }

  std::int64_t group() {
    if (merging()) return std::min(l_, *target());
    return l_;
  }

  bool saturated() const {
    for (ProcessId u : self_.get(g_.domain)) {
      if (u == l_) continue;
      if (self_.get(g_.border, u) && !self_.get(g_.far, u) && !flag(self_.get(g_.stampON, u))) return false;
    }
    return true;
  }

  bool prior() { return merging() || (flag(self_.get(g_.in_prior, id())) && !saturated()); }

 private:
  std::vector<std::int64_t> groups_at(ArrayVar x) const {
    std::vector<std::int64_t> out;
    for (const auto& [w, d] : self_.get(x))
      if (d == k_ + 1)
        if (Value gid = self_.get(g_.in_groups, w)) out.push_back(*gid);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const View& view_;
  const GroupVars& g_;
  int k_;
  const VarStore& self_;
  std::int64_t l_ = 0;
  std::vector<VertexIndex> S_;
  std::optional<Value> target_;
  std::optional<bool> merging_;
  std::optional<std::vector<std::int64_t>> far_groups_, split_groups_;
};

using KeyFn = std::function<Value(Local&, ProcessId)>;
using ScalarFn = std::function<Value(Local&)>;

Value as_flag(bool b) { return b ? 1 : 0; }


Value fit(const Range& r, Value x) { return x && !r.contains(*x) ? bot : x; }

// v.x[u] <-- chi(v, u): enabled when some key of the domain disagrees with
// f(chi(v, u)); the statement rewrites every key.
Action array_action(std::string label, const GroupVars& g, int k, ArrayVar x, Range range, KeyFn chi,
                    std::vector<VarRef> reads) {
  Action a;
  a.label = std::move(label);
  a.guard = [=](const View& view) {
    Local loc(view, g, k);
    for (ProcessId u : view.self().get(g.domain))
      if (view.self().get(x, u) != fit(range, chi(loc, u))) return true;
    return false;
  };
  a.statement = [=](const View& view, StoreWriter& w) {
    Local loc(view, g, k);
    w.assign(x, [&](ProcessId u) { return chi(loc, u); });
  };
  reads.push_back(g.domain);
  reads.push_back(x);
  a.reads = std::move(reads);
  a.writes = {x};
  return a;
}

// v.x <-- chi(v)
Action scalar_action(std::string label, const GroupVars& g, int k, ScalarVar x, ScalarFn chi,
                     std::vector<VarRef> reads) {
  Action a;
  a.label = std::move(label);
  a.guard = [=](const View& view) {
    Local loc(view, g, k);
    return view.self().get(x) != chi(loc);
  };
  a.statement = [=](const View& view, StoreWriter& w) {
    Local loc(view, g, k);
    w.set(x, chi(loc));
  };
  reads.push_back(x);
  a.reads = std::move(reads);
  a.writes = {x};
  return a;
}

}  // namespace

std::vector<Action> init_actions(const bfs::BfsVars& b, const GroupVars& g, int k) {
  const Range dists{0, 2 * static_cast<std::int64_t>(k)};
  const Range flags{0, 1};
  std::vector<Action> out;

  Action domain;
  domain.label = "I1";
  domain.guard = [=](const View& v) { return v.self().get(g.domain) != domain_fn(v, g, k); };
  domain.statement = [=](const View& v, StoreWriter& w) { w.set(g.domain, domain_fn(v, g, k)); };
  domain.reads = {g.domain, g.dist};
  domain.writes = {g.domain};
  out.push_back(std::move(domain));

  out.push_back(array_action(
      "I2", g, k, g.dist, dists, [g](Local& l, ProcessId u) { return dist_fn(l.view(), g, u); }, {g.domain}));
  out.push_back(scalar_action(
      "I3", g, k, g.height, [=](Local& l) -> Value { return height_fn(l.view(), b, g, k); }, {b.parent}));
  out.push_back(scalar_action(
      "I4", g, k, g.initGroup, [=](Local& l) -> Value { return init_group_fn(l.view(), b, g, k); },
      {b.parent, g.height}));
  out.push_back(scalar_action(
      "I5", g, k, g.in_group, [=](Local& l) -> Value { return init_group_fn(l.view(), b, g, k); },
      {b.parent, g.height, g.initGroup}));
  out.push_back(array_action(
      "I6", g, k, g.in_groups, kIdRange,
      [g](Local& l, ProcessId u) { return share(l.view(), g, u, g.in_groups, l.l()); }, {g.dist, g.in_group}));
  out.push_back(array_action(
      "I7", g, k, g.in_groupD, dists,
      [g](Local& l, ProcessId u) { return distance_macro(l.view(), u, g.in_groupD, l.S()); }, {g.in_group}));
  out.push_back(array_action("I8", g, k, g.in_stampON, flags, [](Local&, ProcessId) { return as_flag(false); }, {}));
  out.push_back(array_action("I9", g, k, g.in_prior, flags, [](Local&, ProcessId) { return as_flag(false); }, {}));
  return out;
}

std::vector<Action> merge_actions(const GroupVars& g, int k) {
  const Range dists{0, 2 * static_cast<std::int64_t>(k)};
  const Range flags{0, 1};
  const std::vector<VarRef> target_reads{g.in_group, g.border, g.far, g.in_stampON, g.in_prior};
  auto plus = [](std::vector<VarRef> a, std::initializer_list<VarRef> b) {
    a.insert(a.end(), b);
    return a;
  };
  const auto stamp1_reads = plus(target_reads, {g.target, g.mergeD, g.in_groups, g.in_groupD, g.stamp1,
                                                g.in_stamp1});
  const auto merging_reads = plus(target_reads, {g.target, g.stampD});
  std::vector<Action> out;

  out.push_back(array_action(
      "M1", g, k, g.border, kIdRange,
      [g](Local& l, ProcessId u) { return min_macro(l.view(), g, g.border, u, !l.N(u).empty()); },
      {g.in_group, g.in_groupD}));
  out.push_back(array_action(
      "M2", g, k, g.far, kIdRange,
      [g](Local& l, ProcessId u) { return min_macro(l.view(), g, g.far, u, l.far_from(u)); },
      {g.in_group, g.in_groupD, g.in_groups, g.dist}));
  out.push_back(array_action(
      "M3", g, k, g.target, kIdRange,
      [g](Local& l, ProcessId u) { return share(l.view(), g, u, g.target, l.target()); },
      plus(target_reads, {g.dist})));
  out.push_back(array_action(
      "M4", g, k, g.mergeD, dists, [](Local& l, ProcessId u) { return l.merge_dist(u); },
      plus(target_reads, {g.in_groups})));
  out.push_back(array_action(
      "M5", g, k, g.stamp1, kIdRange, [](Local& l, ProcessId u) { return l.stamp1(u); }, stamp1_reads));
  out.push_back(array_action(
      "M6", g, k, g.stampD, dists, [](Local& l, ProcessId u) { return l.stampD(u); }, stamp1_reads));
  out.push_back(array_action(
      "M7", g, k, g.stamp2, kIdRange,
      [g, k](Local& l, ProcessId u) { return min_macro(l.view(), g, g.stamp2, u, l.stampD(u) == Value(k + 1)); },
      plus(stamp1_reads, {g.stampD})));
  out.push_back(scalar_action(
      "M8", g, k, g.group, [](Local& l) -> Value { return l.group(); }, merging_reads));
  out.push_back(array_action(
      "M9", g, k, g.groups, kIdRange,
      [g](Local& l, ProcessId u) { return share(l.view(), g, u, g.groups, l.self().get(g.group)); },
      {g.dist, g.group}));
  out.push_back(array_action(
      "M10", g, k, g.groupD, dists,
      [g](Local& l, ProcessId u) {
        std::vector<VertexIndex> X;
        const Value mine = l.self().get(g.group);
        for (VertexIndex w : l.view().neighbors())
          if (l.view().at(w).get(g.group) == mine) X.push_back(w);
        return distance_macro(l.view(), u, g.groupD, X);
      },
      {g.group}));
  out.push_back(array_action(
      "M11", g, k, g.merging, flags,
      [g](Local& l, ProcessId u) { return share(l.view(), g, u, g.merging, as_flag(l.merging())); },
      plus(merging_reads, {g.dist})));
  out.push_back(array_action(
      "M12", g, k, g.stampON, flags,
      [g](Local& l, ProcessId u) {
        return as_flag(l.self().get(g.stampD, u) && !l.merging() && !flag(l.self().get(g.merging, u)));
      },
      plus(merging_reads, {g.merging})));
  out.push_back(array_action(
      "M13", g, k, g.prior, flags,
      [g](Local& l, ProcessId u) { return share(l.view(), g, u, g.prior, as_flag(l.prior())); },
      plus(merging_reads, {g.dist, g.stampON})));
  return out;
}

namespace {

bool stamp_ok(Local& l, const GroupVars& g, int k, ProcessId u) {
  const View& view = l.view();
  const VarStore& self = l.self();
  const auto lv = static_cast<ProcessId>(l.l());
  const auto Nu = l.N(u);
  for (VertexIndex w : l.S())
    if (!flag(view.at(w).get(g.in_stampON, u))) return false;
  for (VertexIndex w : Nu)
    if (!flag(view.at(w).get(g.in_stampON, lv))) return false;
  const Value s1 = self.get(g.in_stamp1, u);
  const Value s2 = self.get(g.in_stamp2, u);
  const Value sD = self.get(g.in_stampD, u);
  if (!(s1 || s2) || !sD) return false;
  if (!s2)
    for (VertexIndex w : Nu)
      if (!view.at(w).get(g.in_stamp2, lv)) return false;
  for (VertexIndex w : l.S())
    if (view.at(w).get(g.in_stamp1, u) != s1 || view.at(w).get(g.in_stamp2, u) != s2) return false;
  if (s2 == Value(l.id()) && sD != Value(k + 1)) return false;
  for (const Value& s : {s1, s2})
    if (s && !(*s >= 0 && *s <= 0xffffffffLL && l.member(static_cast<ProcessId>(*s), l.l()))) return false;
  if (!(s1 == Value(l.id()) && !s2 && sD == Value(0))) {
    Value best = bot;
    for (VertexIndex w : l.S()) best = min_value(best, view.at(w).get(g.in_stampD, u));
    for (VertexIndex w : Nu) best = min_value(best, view.at(w).get(g.in_stampD, lv));
    if (sD != plus_one(best)) return false;
  }
  return true;
}

}  // namespace

bool eval_E(const View& view, const bfs::BfsVars& b, const GroupVars& g, int k) {
  const VarStore& self = view.self();
  const IdSet& domain = self.get(g.domain);
  if (domain != domain_fn(view, g, k)) return true;
  for (ProcessId u : domain)
    if (self.get(g.dist, u) != dist_fn(view, g, u)) return true;
  if (self.num(g.height) != height_fn(view, b, g, k)) return true;
  if (self.num(g.initGroup) != init_group_fn(view, b, g, k)) return true;

  Local l(view, g, k);
  const std::int64_t lv = l.l();
  // GrpOK
  for (VertexIndex u : view.neighbors()) {
    const VarStore& s = view.at(u);
    if (s.num(g.initGroup) == self.num(g.initGroup) && s.num(g.in_group) != lv) return true;
  }
  // GrpsOK
  for (ProcessId u : domain)
    if (self.get(g.in_groups, u) != share(view, g, u, g.in_groups, lv)) return true;
  if (lv < 0 || lv > 0xffffffffLL || !l.member(static_cast<ProcessId>(lv), lv)) return true;
  // GrpDistOK
  const Range dists{0, 2 * static_cast<std::int64_t>(k)};
  for (ProcessId u : domain) {
    if (!l.member(u, lv)) continue;
    const Value d = self.get(g.in_groupD, u);
    if (d != fit(dists, distance_macro(view, u, g.in_groupD, l.S()))) return true;
    if (!d || *d > k) return true;
  }
  for (ProcessId u : domain)
    if (flag(self.get(g.in_stampON, u)) && !stamp_ok(l, g, k, u)) return true;
  for (VertexIndex u : view.neighbors()) {
    const VarStore& s = view.at(u);
    for (ProcessId w : set_intersection(domain, s.get(g.domain)))
      if (flag(self.get(g.in_prior, w)) != flag(s.get(g.in_prior, w))) return true;
  }
  return false;
}

Value target_fn(const View& view, const GroupVars& g) {
  Local l(view, g, 1);
  return l.target();
}

bool merging_fn(const View& view, const GroupVars& g) {
  Local l(view, g, 1);
  return l.merging();
}

Instance make_instance(const Graph& graph, int k) {
  if (k < 1) throw ParameterError("k must be at least 1");
  auto schema = std::make_shared<Schema>();
  const bfs::BfsVars b = bfs::declare(*schema, graph.size());
  const loop::LoopVars lv = loop::declare(*schema);
  const GroupVars g = declare(*schema, k);

  loop::BaseAlgorithmBinding binding;
  binding.A = merge_actions(g, k);
  binding.P = init_actions(b, g, k);
  binding.E = [b, g, k](const View& v) { return eval_E(v, b, g, k); };
  binding.E_reads = {g.domain,     g.dist,      g.height,    g.initGroup, g.in_group,  g.in_groups,
                     g.in_groupD,  g.in_stampON, g.in_prior, g.in_stamp1, g.in_stamp2, g.in_stampD,
                     b.parent};
  binding.copies = copy_pairs(g);

  Instance inst;
  inst.k = k;
  inst.n = graph.size();
  inst.schema = schema;
  inst.vars = g;
  inst.loop = loop::compose(schema, bfs::make_layer(b, graph.size()), lv, std::move(binding));
  return inst;
}

}  // namespace selfstab::kgrouping
