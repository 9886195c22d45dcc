#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gmrfdiff {

class RandomStream;

using NodeIndex = std::size_t;
using NodeSet = std::vector<NodeIndex>;  // always sorted ascending

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Undirected edge, stored with first < second.
struct Edge {
  NodeIndex first = 0;
  NodeIndex second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// The two graphs a sensor network lives on: the communication graph (who can
// talk to whom) and the statistical dependency graph of the noise field. The
// dependency graph must be a subgraph of the communication graph, since nodes
// exchange raw measurements along every dependency edge.
//
// Immutable after construction.
class NetworkTopology {
 public:
  // Validates and normalizes the edge lists (orientation, duplicates).
  // Throws InvalidEdge for self-loops or out-of-range endpoints and
  // SubgraphViolation if a dependency edge has no communication edge.
  static NetworkTopology build(std::vector<Point> positions, std::vector<Edge> comm_edges,
                               std::vector<Edge> dep_edges);

  std::size_t n_nodes() const { return positions_.size(); }
  const std::vector<Point>& positions() const { return positions_; }
  const std::vector<Edge>& comm_edges() const { return comm_edges_; }
  const std::vector<Edge>& dep_edges() const { return dep_edges_; }

  double distance(NodeIndex i, NodeIndex j) const;

  // N_i, self-inclusive.
  const NodeSet& spatial_neighborhood(NodeIndex i) const { return spatial_.at(i); }
  // M_i = {j != i : {i,j} is a dependency edge}.
  const NodeSet& markov_neighborhood(NodeIndex i) const { return markov_.at(i); }
  // A_i = {j in M_i : j > i}; each dependency edge appears in exactly one A_i.
  const NodeSet& forward_markov_neighborhood(NodeIndex i) const { return forward_.at(i); }

  bool communicates(NodeIndex i, NodeIndex j) const;
  bool depends(NodeIndex i, NodeIndex j) const;

 private:
  std::vector<Point> positions_;
  std::vector<Edge> comm_edges_;
  std::vector<Edge> dep_edges_;
  std::vector<NodeSet> spatial_;
  std::vector<NodeSet> markov_;
  std::vector<NodeSet> forward_;
};

NetworkTopology build_topology(std::vector<Point> positions, std::vector<Edge> comm_edges,
                               std::vector<Edge> dep_edges);

bool is_connected(const NetworkTopology& topology);
bool is_acyclic_dependency(const NetworkTopology& topology);

inline const NodeSet& spatial_neighborhood(const NetworkTopology& topology, NodeIndex i) {
  return topology.spatial_neighborhood(i);
}
inline const NodeSet& markov_neighborhood(const NetworkTopology& topology, NodeIndex i) {
  return topology.markov_neighborhood(i);
}

// Random geometric graph on the unit square (link when distance <= radius),
// redrawn until connected, with a uniformly random spanning tree of the
// communication graph (Wilson's algorithm) as the dependency graph. The result
// always satisfies the subgraph and acyclicity requirements.
NetworkTopology random_geometric_topology(std::size_t n_nodes, double radius, RandomStream& stream);

}  // namespace gmrfdiff
