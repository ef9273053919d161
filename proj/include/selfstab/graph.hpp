#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selfstab {

// Process identifiers are drawn from 32-bit non-negative integers.
using ProcessId = std::uint32_t;

// Dense position of a process inside a Graph (0 .. n-1, ordered by id).
using VertexIndex = std::uint32_t;

// Hop count. kInfinity is a distance verdict ("not connected"), unrelated to
// the null value of algorithm variables.
using Hops = std::uint32_t;
inline constexpr Hops kInfinity = std::numeric_limits<Hops>::max();

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable connected undirected network. All-pairs hop distances are
// computed once at construction, so every query is a const lookup and the
// object can be shared across threads.
class Graph {
 public:
  using Edge = std::pair<ProcessId, ProcessId>;

  Graph(std::vector<ProcessId> vertices, const std::vector<Edge>& edges);

  // Vertex set is inferred from the edge endpoints.
  static Graph from_edges(const std::vector<Edge>& edges);

  std::size_t size() const { return ids_.size(); }
  std::span<const ProcessId> vertices() const { return ids_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool contains(ProcessId v) const;
  VertexIndex index_of(ProcessId v) const;  // throws GraphError if unknown
  ProcessId id_of(VertexIndex i) const { return ids_[i]; }

  // Neighbor indices of vertex i, sorted by identifier.
  std::span<const VertexIndex> adjacent(VertexIndex i) const { return adj_[i]; }
  bool has_edge(VertexIndex a, VertexIndex b) const;

  Hops distance(VertexIndex a, VertexIndex b) const { return apsp_[a * ids_.size() + b]; }
  Hops diameter() const { return diameter_; }

 private:
  std::vector<ProcessId> ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<VertexIndex>> adj_;
  std::vector<Hops> apsp_;
  Hops diameter_ = 0;
};

std::vector<ProcessId> neighbors(const Graph& g, ProcessId v);
Hops dist(const Graph& g, ProcessId u, ProcessId v);

// Diameter of the subgraph induced by s; kInfinity when it is disconnected.
Hops induced_diameter(const Graph& g, std::span<const ProcessId> s);
Hops induced_diameter_indices(const Graph& g, std::span<const VertexIndex> s);

// Hop distances from `source` inside the subgraph induced by `members`
// (indexed by VertexIndex, kInfinity outside or unreachable).
std::vector<Hops> induced_distances(const Graph& g, std::span<const VertexIndex> members,
                                    VertexIndex source);

std::vector<ProcessId> k_neighborhood(const Graph& g, ProcessId v, unsigned i);

// Loader: JSON {"vertices":[...],"edges":[[u,v],...]} or an edge list with
// one "u v" pair per line ('#' starts a comment).
Graph load_graph(const std::filesystem::path& path);
Graph parse_graph(const std::string& text);
std::string to_json(const Graph& g);

// Standard families used by tests and sweeps. Identifiers are 1..n.
Graph make_path(std::size_t n);
Graph make_cycle(std::size_t n);
Graph make_grid(std::size_t rows, std::size_t cols);
Graph make_star(std::size_t leaves);

// Random spanning tree plus G(n,p) extra edges. When `scatter_ids` is set the
// identifiers are a random n-subset of [0, 4n) instead of 1..n.
Graph make_random_connected(std::size_t n, double p, std::uint64_t seed, bool scatter_ids = false);

}  // namespace selfstab
