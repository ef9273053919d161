#include "selfstab/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "selfstab/rng.hpp"

namespace selfstab {

namespace {

std::vector<Hops> bfs_from(const std::vector<std::vector<VertexIndex>>& adj, VertexIndex s,
                           const std::vector<char>* allowed) {
  std::vector<Hops> d(adj.size(), kInfinity);
  std::deque<VertexIndex> q;
  d[s] = 0;
  q.push_back(s);
  while (!q.empty()) {
    const VertexIndex v = q.front();
    q.pop_front();
    for (VertexIndex w : adj[v]) {
      if (d[w] != kInfinity) continue;
      if (allowed && !(*allowed)[w]) continue;
      d[w] = d[v] + 1;
      q.push_back(w);
    }
  }
  return d;
}

}  // namespace

Graph::Graph(std::vector<ProcessId> vertices, const std::vector<Edge>& edges) : ids_(std::move(vertices)) {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
    throw GraphError("duplicate process identifier");
  if (ids_.size() < 2) throw GraphError("a network needs at least two processes");

  adj_.assign(ids_.size(), {});
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a == b) throw GraphError("self-loop on process " + std::to_string(a));
    if (!contains(a) || !contains(b))
      throw GraphError("edge {" + std::to_string(a) + "," + std::to_string(b) + "} has an unknown endpoint");
    const Edge key{std::min(a, b), std::max(a, b)};
    if (!seen.insert(key).second)
      throw GraphError("parallel edge {" + std::to_string(key.first) + "," + std::to_string(key.second) + "}");
    const VertexIndex ia = index_of(a);
    const VertexIndex ib = index_of(b);
    adj_[ia].push_back(ib);
    adj_[ib].push_back(ia);
  }
  edges_.assign(seen.begin(), seen.end());
  for (auto& row : adj_) std::sort(row.begin(), row.end());

  const std::size_t n = ids_.size();
  apsp_.resize(n * n);
  for (VertexIndex s = 0; s < n; ++s) {
    auto d = bfs_from(adj_, s, nullptr);
    for (VertexIndex t = 0; t < n; ++t) {
      if (d[t] == kInfinity) throw GraphError("network is not connected");
      apsp_[s * n + t] = d[t];
      diameter_ = std::max(diameter_, d[t]);
    }
  }
}

Graph Graph::from_edges(const std::vector<Edge>& edges) {
  std::set<ProcessId> vs;
  for (auto [a, b] : edges) {
    vs.insert(a);
    vs.insert(b);
  }
  return Graph(std::vector<ProcessId>(vs.begin(), vs.end()), edges);
}

bool Graph::contains(ProcessId v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }

VertexIndex Graph::index_of(ProcessId v) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
  if (it == ids_.end() || *it != v) throw GraphError("unknown process " + std::to_string(v));
  return static_cast<VertexIndex>(it - ids_.begin());
}

bool Graph::has_edge(VertexIndex a, VertexIndex b) const {
  return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
}

std::vector<ProcessId> neighbors(const Graph& g, ProcessId v) {
  std::vector<ProcessId> out;
  for (VertexIndex w : g.adjacent(g.index_of(v))) out.push_back(g.id_of(w));
  return out;
}

Hops dist(const Graph& g, ProcessId u, ProcessId v) { return g.distance(g.index_of(u), g.index_of(v)); }

std::vector<Hops> induced_distances(const Graph& g, std::span<const VertexIndex> members, VertexIndex source) {
  std::vector<char> allowed(g.size(), 0);
  for (VertexIndex m : members) allowed[m] = 1;
  std::vector<std::vector<VertexIndex>> adj(g.size());
  for (VertexIndex m : members)
    for (VertexIndex w : g.adjacent(m))
      if (allowed[w]) adj[m].push_back(w);
  return bfs_from(adj, source, &allowed);
}

Hops induced_diameter_indices(const Graph& g, std::span<const VertexIndex> s) {
  if (s.empty()) throw GraphError("diameter of an empty vertex set");
  Hops best = 0;
  for (VertexIndex src : s) {
    auto d = induced_distances(g, s, src);
    for (VertexIndex t : s) {
      if (d[t] == kInfinity) return kInfinity;
      best = std::max(best, d[t]);
    }
  }
  return best;
}

Hops induced_diameter(const Graph& g, std::span<const ProcessId> s) {
  std::vector<VertexIndex> idx;
  idx.reserve(s.size());
  for (ProcessId v : s) idx.push_back(g.index_of(v));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return induced_diameter_indices(g, idx);
}

std::vector<ProcessId> k_neighborhood(const Graph& g, ProcessId v, unsigned i) {
  const VertexIndex vi = g.index_of(v);
  std::vector<ProcessId> out;
  for (VertexIndex w = 0; w < g.size(); ++w)
    if (g.distance(vi, w) <= i) out.push_back(g.id_of(w));
  return out;
}

Graph parse_graph(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw GraphError(std::string("malformed graph JSON: ") + e.what());
    }
    if (!j.contains("vertices") || !j.contains("edges")) throw GraphError("graph JSON needs vertices and edges");
    std::vector<ProcessId> vs;
    std::vector<Graph::Edge> es;
    try {
      for (auto& v : j.at("vertices")) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
            v.get<std::int64_t>() > std::numeric_limits<ProcessId>::max())
          throw GraphError("vertex identifiers must be 32-bit non-negative integers");
        vs.push_back(v.get<ProcessId>());
      }
      for (auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw GraphError("edges must be [u,v] pairs");
        es.emplace_back(e[0].get<ProcessId>(), e[1].get<ProcessId>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw GraphError(std::string("malformed graph JSON: ") + e.what());
    }
    return Graph(std::move(vs), es);
  }

  std::vector<Graph::Edge> es;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || a < 0 || b < 0)
      throw GraphError("edge list line " + std::to_string(lineno) + ": expected two non-negative ids");
    es.emplace_back(static_cast<ProcessId>(a), static_cast<ProcessId>(b));
  }
  return Graph::from_edges(es);
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

std::string to_json(const Graph& g) {
  nlohmann::json j;
  j["vertices"] = std::vector<ProcessId>(g.vertices().begin(), g.vertices().end());
  j["edges"] = nlohmann::json::array();
  for (auto [a, b] : g.edges()) j["edges"].push_back({a, b});
  return j.dump();
}

Graph make_path(std::size_t n) {
  std::vector<Graph::Edge> es;
  for (ProcessId i = 1; i < n; ++i) es.emplace_back(i, i + 1);
  return Graph::from_edges(es);
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw GraphError("cycle needs at least three processes");
  std::vector<Graph::Edge> es;
  for (ProcessId i = 1; i < n; ++i) es.emplace_back(i, i + 1);
  es.emplace_back(static_cast<ProcessId>(n), 1);
  return Graph::from_edges(es);
}

Graph make_grid(std::size_t rows, std::size_t cols) {
  std::vector<Graph::Edge> es;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<ProcessId>(r * cols + c + 1); };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) es.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) es.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph::from_edges(es);
}

Graph make_star(std::size_t leaves) {
  std::vector<Graph::Edge> es;
  for (ProcessId i = 2; i <= leaves + 1; ++i) es.emplace_back(1, i);
  return Graph::from_edges(es);
}

Graph make_random_connected(std::size_t n, double p, std::uint64_t seed, bool scatter_ids) {
  Rng rng(seed);
  std::vector<ProcessId> ids(n);
  if (scatter_ids) {
    std::vector<ProcessId> pool(4 * n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    std::copy_n(pool.begin(), n, ids.begin());
  } else {
    std::iota(ids.begin(), ids.end(), 1);
  }
  // Random attachment order gives a random spanning tree.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::set<Graph::Edge> es;
  for (std::size_t i = 1; i < n; ++i) {
    ProcessId a = ids[order[i]];
    ProcessId b = ids[order[rng.below(i)]];
    es.insert({std::min(a, b), std::max(a, b)});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.chance(p)) es.insert({std::min(ids[i], ids[j]), std::max(ids[i], ids[j])});
  return Graph(ids, std::vector<Graph::Edge>(es.begin(), es.end()));
}

}  // namespace selfstab
