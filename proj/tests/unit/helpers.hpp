#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "selfstab/graph.hpp"

namespace testutil {

// Plain BFS over the edge list, independent of Graph's precomputed table.
// Returns hop counts indexed like g.vertices(); unreachable is -1.
inline std::vector<int> bfs_hops(const selfstab::Graph& g, selfstab::ProcessId src,
                                 const std::vector<selfstab::ProcessId>& allowed = {}) {
  const auto ids = std::vector<selfstab::ProcessId>(g.vertices().begin(), g.vertices().end());
  auto pos = [&](selfstab::ProcessId v) { return std::lower_bound(ids.begin(), ids.end(), v) - ids.begin(); };
  auto ok = [&](selfstab::ProcessId v) {
    return allowed.empty() || std::find(allowed.begin(), allowed.end(), v) != allowed.end();
  };
  std::vector<int> d(ids.size(), -1);
  std::deque<selfstab::ProcessId> q{src};
  d[pos(src)] = 0;
  while (!q.empty()) {
    const auto v = q.front();
    q.pop_front();
    for (const auto& [a, b] : g.edges()) {
      selfstab::ProcessId w;
      if (a == v) {
        w = b;
      } else if (b == v) {
        w = a;
      } else {
        continue;
      }
      if (!ok(w) || d[pos(w)] >= 0) continue;
      d[pos(w)] = d[pos(v)] + 1;
      q.push_back(w);
    }
  }
  return d;
}

}  // namespace testutil
