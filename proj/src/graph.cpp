#include "gmrfdiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

namespace {

std::vector<Edge> normalize_edges(std::vector<Edge> edges, std::size_t n, const char* what) {
  for (auto& e : edges) {
    if (e.first >= n || e.second >= n) {
      throw InvalidEdge(std::string(what) + " edge {" + std::to_string(e.first) + "," +
                        std::to_string(e.second) + "} references a node outside 0.." +
                        std::to_string(n == 0 ? 0 : n - 1));
    }
    if (e.first == e.second) {
      throw InvalidEdge(std::string(what) + " edge is a self-loop at node " + std::to_string(e.first));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

NetworkTopology NetworkTopology::build(std::vector<Point> positions, std::vector<Edge> comm_edges,
                                       std::vector<Edge> dep_edges) {
  const std::size_t n = positions.size();
  NetworkTopology t;
  t.positions_ = std::move(positions);
  t.comm_edges_ = normalize_edges(std::move(comm_edges), n, "communication");
  t.dep_edges_ = normalize_edges(std::move(dep_edges), n, "dependency");

  for (const auto& e : t.dep_edges_) {
    if (!std::binary_search(t.comm_edges_.begin(), t.comm_edges_.end(), e)) {
      throw SubgraphViolation("dependency edge {" + std::to_string(e.first) + "," +
                              std::to_string(e.second) + "} has no supporting communication link");
    }
  }

  t.spatial_.assign(n, {});
  t.markov_.assign(n, {});
  t.forward_.assign(n, {});
  for (NodeIndex i = 0; i < n; ++i) t.spatial_[i].push_back(i);
  for (const auto& e : t.comm_edges_) {
    t.spatial_[e.first].push_back(e.second);
    t.spatial_[e.second].push_back(e.first);
  }
  for (const auto& e : t.dep_edges_) {
    t.markov_[e.first].push_back(e.second);
    t.markov_[e.second].push_back(e.first);
    t.forward_[e.first].push_back(e.second);
  }
  for (NodeIndex i = 0; i < n; ++i) {
    std::sort(t.spatial_[i].begin(), t.spatial_[i].end());
    std::sort(t.markov_[i].begin(), t.markov_[i].end());
    std::sort(t.forward_[i].begin(), t.forward_[i].end());
  }
  return t;
}

double NetworkTopology::distance(NodeIndex i, NodeIndex j) const {
  const Point& a = positions_.at(i);
  const Point& b = positions_.at(j);
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool NetworkTopology::communicates(NodeIndex i, NodeIndex j) const {
  const auto& s = spatial_.at(i);
  return i != j && std::binary_search(s.begin(), s.end(), j);
}

bool NetworkTopology::depends(NodeIndex i, NodeIndex j) const {
  const auto& s = markov_.at(i);
  return std::binary_search(s.begin(), s.end(), j);
}

NetworkTopology build_topology(std::vector<Point> positions, std::vector<Edge> comm_edges,
                               std::vector<Edge> dep_edges) {
  return NetworkTopology::build(std::move(positions), std::move(comm_edges), std::move(dep_edges));
}

bool is_connected(const NetworkTopology& topology) {
  const std::size_t n = topology.n_nodes();
  if (n == 0) return true;
  DisjointSets sets(n);
  std::size_t components = n;
  for (const auto& e : topology.comm_edges()) {
    if (sets.unite(e.first, e.second)) --components;
  }
  return components == 1;
}

bool is_acyclic_dependency(const NetworkTopology& topology) {
  DisjointSets sets(topology.n_nodes());
  for (const auto& e : topology.dep_edges()) {
    if (!sets.unite(e.first, e.second)) return false;
  }
  return true;
}

NetworkTopology random_geometric_topology(std::size_t n_nodes, double radius, RandomStream& stream) {
  if (n_nodes == 0) throw InvalidParameter("random topology needs at least one node");
  if (!(radius > 0.0)) throw InvalidParameter("random topology radius must be positive");

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Point> positions(n_nodes);
    for (auto& p : positions) {
      p.x = stream.uniform();
      p.y = stream.uniform();
    }
    std::vector<Edge> comm;
    std::vector<NodeSet> adjacency(n_nodes);
    for (NodeIndex i = 0; i < n_nodes; ++i) {
      for (NodeIndex j = i + 1; j < n_nodes; ++j) {
        if (std::hypot(positions[i].x - positions[j].x, positions[i].y - positions[j].y) <= radius) {
          comm.push_back({i, j});
          adjacency[i].push_back(j);
          adjacency[j].push_back(i);
        }
      }
    }
    auto candidate = NetworkTopology::build(positions, comm, {});
    if (!is_connected(candidate)) continue;

    // Wilson's algorithm: loop-erased random walks yield a uniform spanning tree.
    std::vector<bool> in_tree(n_nodes, false);
    std::vector<NodeIndex> next(n_nodes, 0);
    in_tree[0] = true;
    for (NodeIndex start = 1; start < n_nodes; ++start) {
      NodeIndex u = start;
      while (!in_tree[u]) {
        const auto& nb = adjacency[u];
        next[u] = nb[static_cast<std::size_t>(stream.next() % nb.size())];
        u = next[u];
      }
      u = start;
      while (!in_tree[u]) {
        in_tree[u] = true;
        u = next[u];
      }
    }
    std::vector<Edge> dep;
    for (NodeIndex i = 1; i < n_nodes; ++i) dep.push_back({std::min(i, next[i]), std::max(i, next[i])});
    return NetworkTopology::build(std::move(positions), std::move(comm), std::move(dep));
  }
  throw InvalidParameter("could not draw a connected geometric graph; increase the radius");
}

}  // namespace gmrfdiff
