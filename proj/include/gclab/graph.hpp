#pragma once

#include <string>
#include <vector>

#include "gclab/linalg.hpp"

namespace gclab::graph {

// Undirected weighted edge, stored once with i < j (0-based internally;
// serialization uses 1-based vertex indices).
struct Edge {
  int i = 0;
  int j = 0;
  double w = 1.0;
};

struct Graph {
  int order = 0;
  std::vector<Edge> edges;                   // sorted by (i, j), unique
  std::vector<std::vector<double>> coords;   // empty or one point per vertex
  bool connected = false;
};

// Validates (no self loops, positive weights, indices in range, no duplicate
// edges), sorts edges, and records connectivity. Disconnection is not an
// error here; operations that require connectivity check the flag.
Graph make_graph(int order, std::vector<Edge> edges,
                 std::vector<std::vector<double>> coords = {});

enum class WeightMode { unit, gaussian };

// k-nearest-neighbor graph with union symmetrization: edge {i,j} is present
// when i is among the k nearest of j or vice versa. Distance ties are broken
// by lower vertex index. Gaussian mode sets w = exp(-dist^2 / sigma^2).
Graph knn_graph(const std::vector<std::vector<double>>& coords, int k,
                WeightMode mode = WeightMode::unit, double sigma = 1.0);

enum class ShiftKind { adjacency, laplacian, sym_normalized_laplacian };

std::string shift_kind_name(ShiftKind kind);

// Dense symmetric shift matrix of the requested kind. The symmetric
// normalized Laplacian I - D^{-1/2} W D^{-1/2} requires every degree > 0.
linalg::Mat shift_matrix(const Graph& g, ShiftKind kind);

std::vector<linalg::Mat> shift_matrices(const Graph& g,
                                        const std::vector<ShiftKind>& kinds);

// Hop distance by breadth-first search; throws when j is unreachable from i.
int geodesic(const Graph& g, int i, int j);

std::vector<double> degrees(const Graph& g);

std::string to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

}  // namespace gclab::graph
