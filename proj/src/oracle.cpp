#include "selfstab/oracle.hpp"

#include <algorithm>
#include <set>

namespace selfstab::oracle {

namespace {

std::vector<VertexIndex> indices(const Graph& g, const std::vector<ProcessId>& ids) {
  std::vector<VertexIndex> out;
  out.reserve(ids.size());
  for (ProcessId v : ids) out.push_back(g.index_of(v));
  std::sort(out.begin(), out.end());
  return out;
}

void check_disjoint(const std::vector<VertexIndex>& a, const std::vector<VertexIndex>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("groups must be nonempty");
  std::vector<VertexIndex> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  if (!both.empty()) throw std::invalid_argument("groups overlap");
}

bool adjacent(const Graph& g, const std::vector<VertexIndex>& a, const std::vector<VertexIndex>& b) {
  for (VertexIndex x : a)
    for (VertexIndex y : g.adjacent(x))
      if (std::binary_search(b.begin(), b.end(), y)) return true;
  return false;
}

bool near_idx(const Graph& g, const std::vector<VertexIndex>& a, const std::vector<VertexIndex>& b, int k) {
  if (!adjacent(g, a, b)) return false;
  for (VertexIndex x : a)
    for (VertexIndex y : b)
      if (g.distance(x, y) > static_cast<Hops>(k)) return false;
  return true;
}

bool mergeable_idx(const Graph& g, const std::vector<VertexIndex>& a, const std::vector<VertexIndex>& b, int k) {
  std::vector<VertexIndex> u = a;
  u.insert(u.end(), b.begin(), b.end());
  std::sort(u.begin(), u.end());
  return induced_diameter_indices(g, u) <= static_cast<Hops>(k);
}

}  // namespace

bool near(const Graph& g, const std::vector<ProcessId>& a, const std::vector<ProcessId>& b, int k) {
  const auto ia = indices(g, a), ib = indices(g, b);
  check_disjoint(ia, ib);
  return near_idx(g, ia, ib, k);
}

bool mergeable(const Graph& g, const std::vector<ProcessId>& a, const std::vector<ProcessId>& b, int k) {
  const auto ia = indices(g, a), ib = indices(g, b);
  check_disjoint(ia, ib);
  return mergeable_idx(g, ia, ib, k);
}

GroupingReport check_Lk(const Graph& g, const std::vector<std::int64_t>& label, int k) {
  GroupingReport r;
  if (label.size() != g.size()) {
    r.violations.push_back("assignment does not cover every process");
    return r;
  }
  std::map<std::int64_t, std::vector<VertexIndex>> parts;
  for (VertexIndex v = 0; v < g.size(); ++v) {
    parts[label[v]].push_back(v);
    r.groups[label[v]].push_back(g.id_of(v));
  }
  r.group_count = parts.size();
  for (const auto& [id, members] : parts) {
    const Hops d = induced_diameter_indices(g, members);
    r.per_group_diameter[id] = d;
    if (d > static_cast<Hops>(k))
      r.violations.push_back("group " + std::to_string(id) + " has diameter " +
                             (d == kInfinity ? std::string("inf") : std::to_string(d)));
  }
  for (auto a = parts.begin(); a != parts.end(); ++a)
    for (auto b = std::next(a); b != parts.end(); ++b)
      if (adjacent(g, a->second, b->second) && mergeable_idx(g, a->second, b->second, k)) {
        r.mergeable_pairs.emplace_back(a->first, b->first);
        r.violations.push_back("groups " + std::to_string(a->first) + " and " + std::to_string(b->first) +
                               " are mergeable");
      }
  r.verdict = r.violations.empty();
  return r;
}

GroupingReport check_Lk(const Graph& g, const Configuration& cfg, ScalarVar group, int k) {
  std::vector<std::int64_t> label(g.size());
  for (VertexIndex v = 0; v < g.size(); ++v) label[v] = cfg[v].num(group);
  return check_Lk(g, label, k);
}

nlohmann::json to_json(const GroupingReport& r) {
  nlohmann::json j;
  j["verdict"] = r.verdict;
  j["group_count"] = r.group_count;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [id, members] : r.groups) {
    const Hops d = r.per_group_diameter.at(id);
    groups.push_back({{"id", id},
                      {"members", members},
                      {"diameter", d == kInfinity ? nlohmann::json(nullptr) : nlohmann::json(d)}});
  }
  j["groups"] = groups;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : r.mergeable_pairs) pairs.push_back({a, b});
  j["mergeable_pairs"] = pairs;
  j["violations"] = r.violations;
  return j;
}

std::size_t exhaustive_min_groups(const Graph& g, int k) {
  const std::size_t n = g.size();
  if (n > 10) throw std::invalid_argument("exhaustive search is limited to n <= 10");
  const std::uint32_t full = (1u << n) - 1;
  std::vector<char> ok(full + 1, 0);
  for (std::uint32_t m = 1; m <= full; ++m) {
    std::vector<VertexIndex> s;
    for (VertexIndex i = 0; i < n; ++i)
      if (m >> i & 1u) s.push_back(i);
    ok[m] = induced_diameter_indices(g, s) <= static_cast<Hops>(k);
  }
  std::vector<std::size_t> best(full + 1, n + 1);
  best[0] = 0;
  for (std::uint32_t m = 1; m <= full; ++m) {
    const std::uint32_t low = m & (~m + 1);
    // Parts containing the lowest member of m.
    for (std::uint32_t s = m; s; s = (s - 1) & m)
      if ((s & low) && ok[s]) best[m] = std::min(best[m], best[m ^ s] + 1);
  }
  return best[full];
}

std::map<std::int64_t, std::vector<ProcessId>> copy_groups(const Graph& g, const Configuration& cfg,
                                                           const kgrouping::GroupVars& v) {
  std::map<std::int64_t, std::vector<ProcessId>> out;
  for (VertexIndex i = 0; i < g.size(); ++i) out[cfg[i].num(v.in_group)].push_back(g.id_of(i));
  return out;
}

namespace {

struct CopyView {
  std::vector<std::int64_t> ids;
  std::vector<std::vector<VertexIndex>> members;
  std::vector<VertexIndex> leader;  // vertex whose id names the group, or n when absent
};

CopyView copy_view(const Graph& g, const Configuration& cfg, const kgrouping::GroupVars& v) {
  CopyView cv;
  for (const auto& [id, ms] : copy_groups(g, cfg, v)) {
    cv.ids.push_back(id);
    cv.members.push_back({});
    for (ProcessId m : ms) cv.members.back().push_back(g.index_of(m));
    const bool named = id >= 0 && id <= 0xffffffffLL && g.contains(static_cast<ProcessId>(id));
    cv.leader.push_back(named ? g.index_of(static_cast<ProcessId>(id)) : static_cast<VertexIndex>(g.size()));
  }
  return cv;
}

bool stamped(const Configuration& cfg, const kgrouping::GroupVars& v, VertexIndex at, std::int64_t other) {
  return kgrouping::flag(cfg[at].get(v.in_stampON, static_cast<ProcessId>(other)));
}

}  // namespace

Potential potential(const Graph& g, const Configuration& cfg, const kgrouping::GroupVars& v, int k) {
  const CopyView cv = copy_view(g, cfg, v);
  const std::size_t m = cv.ids.size();
  const std::size_t n = g.size();
  Potential p;
  p.groups = m;
  std::vector<char> prior(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (cv.leader[i] < n) prior[i] = kgrouping::flag(cfg[cv.leader[i]].get(v.in_prior, static_cast<ProcessId>(cv.ids[i])));
  for (std::size_t i = 0; i < m; ++i) {
    p.prior += prior[i];
    if (prior[i] || cv.leader[i] >= n) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || prior[j]) continue;
      if (!near_idx(g, cv.members[i], cv.members[j], k)) continue;
      if (!stamped(cfg, v, cv.leader[i], cv.ids[j])) {
        ++p.black;
        break;
      }
    }
  }
  return p;
}

std::vector<std::string> stamp_violations(const Graph& g, const Configuration& cfg, const kgrouping::GroupVars& v,
                                          int k) {
  const CopyView cv = copy_view(g, cfg, v);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < cv.ids.size(); ++i)
    for (std::size_t j = 0; j < cv.ids.size(); ++j) {
      if (i == j || !near_idx(g, cv.members[i], cv.members[j], k)) continue;
      const bool any = std::any_of(cv.members[i].begin(), cv.members[i].end(),
                                   [&](VertexIndex w) { return stamped(cfg, v, w, cv.ids[j]); });
      if (any && mergeable_idx(g, cv.members[i], cv.members[j], k))
        out.push_back("stamp between mergeable groups " + std::to_string(cv.ids[i]) + " and " +
                      std::to_string(cv.ids[j]));
    }
  return out;
}

}  // namespace selfstab::oracle
