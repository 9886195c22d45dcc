#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gmrfdiff/gmrf.hpp"
#include "gmrfdiff/graph.hpp"
#include "gmrfdiff/random.hpp"
#include "gmrfdiff/sigmodel.hpp"

namespace fixtures {

using namespace gmrfdiff;

// Nodes on a line, one unit apart, with both graphs equal to the path.
inline NetworkTopology chain(std::size_t n) {
  std::vector<Point> pos;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    pos.push_back({static_cast<double>(i), 0.0});
    if (i + 1 < n) edges.push_back({i, i + 1});
  }
  return NetworkTopology::build(pos, edges, edges);
}

// Four nodes: communication graph is the 4-cycle plus one chord, dependency
// graph a spanning tree of it.
inline NetworkTopology small_mesh() {
  std::vector<Point> pos{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Edge> comm{{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}};
  std::vector<Edge> dep{{0, 1}, {1, 2}, {2, 3}};
  return NetworkTopology::build(pos, comm, dep);
}

inline GmrfModel field(const NetworkTopology& topo, double sigma2 = 0.5, double nugget = 0.9, double kappa = 0.3) {
  return GmrfModel::build(topo, GmrfParams{sigma2, nugget, kappa});
}

inline RegressorStats stats(std::size_t m, std::vector<double> powers) {
  RegressorStats s;
  s.m_dim = m;
  s.per_node_power = std::move(powers);
  return s;
}

inline double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace fixtures
