#include "gclab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "gclab/error.hpp"
#include "json.hpp"

namespace gclab::graph {

namespace {

bool bfs_connected(int order, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(order);
  for (const Edge& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<char> seen(order, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == order;
}

}  // namespace

Graph make_graph(int order, std::vector<Edge> edges,
                 std::vector<std::vector<double>> coords) {
  if (order < 1) throw InvalidInput("make_graph: order must be >= 1");
  for (Edge& e : edges) {
    if (e.i == e.j) throw InvalidInput("make_graph: self loop at vertex " + std::to_string(e.i + 1));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= order) throw InvalidInput("make_graph: edge index out of range");
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw InvalidInput("make_graph: edge weight must be positive and finite");
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t t = 1; t < edges.size(); ++t)
    if (edges[t].i == edges[t - 1].i && edges[t].j == edges[t - 1].j)
      throw InvalidInput("make_graph: duplicate edge (" + std::to_string(edges[t].i + 1) +
                         "," + std::to_string(edges[t].j + 1) + ")");
  if (!coords.empty()) {
    if (static_cast<int>(coords.size()) != order)
      throw InvalidInput("make_graph: coords size must equal order");
    for (const auto& c : coords)
      if (c.size() != coords[0].size() || c.empty())
        throw InvalidInput("make_graph: coords must share a nonzero dimension");
  }
  Graph g;
  g.order = order;
  g.edges = std::move(edges);
  g.coords = std::move(coords);
  g.connected = bfs_connected(order, g.edges);
  return g;
}

Graph knn_graph(const std::vector<std::vector<double>>& coords, int k,
                WeightMode mode, double sigma) {
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw InvalidInput("knn_graph: need at least 2 points");
  if (k < 1 || k > n - 1) throw InvalidInput("knn_graph: k must lie in [1, n-1]");
  if (mode == WeightMode::gaussian && !(sigma > 0.0))
    throw InvalidInput("knn_graph: gaussian weights need sigma > 0");
  const std::size_t dim = coords[0].size();
  if (dim == 0) throw InvalidInput("knn_graph: coordinates must be nonempty");
  for (const auto& c : coords)
    if (c.size() != dim) throw InvalidInput("knn_graph: inconsistent coordinate dimension");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coords[i] == coords[j])
        throw InvalidInput("knn_graph: duplicate coordinates at vertices " +
                           std::to_string(i + 1) + " and " + std::to_string(j + 1));

  auto dist2 = [&](int i, int j) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = coords[i][d] - coords[j][d];
      s += t * t;
    }
    return s;
  };

  std::set<std::pair<int, int>> selected;
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) cand.push_back({dist2(i, j), j});
    std::sort(cand.begin(), cand.end());  // ties fall to the lower index
    for (int t = 0; t < k; ++t) {
      const int j = cand[t].second;
      selected.insert({std::min(i, j), std::max(i, j)});
    }
  }

  std::vector<Edge> edges;
  edges.reserve(selected.size());
  for (const auto& [i, j] : selected) {
    double w = 1.0;
    if (mode == WeightMode::gaussian) w = std::exp(-dist2(i, j) / (sigma * sigma));
    edges.push_back({i, j, w});
  }
  return make_graph(n, std::move(edges), coords);
}

std::string shift_kind_name(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::adjacency: return "adjacency";
    case ShiftKind::laplacian: return "laplacian";
    case ShiftKind::sym_normalized_laplacian: return "sym_normalized_laplacian";
  }
  throw InvalidInput("shift_kind_name: unknown kind");
}

std::vector<double> degrees(const Graph& g) {
  std::vector<double> d(g.order, 0.0);
  for (const Edge& e : g.edges) {
    d[e.i] += e.w;
    d[e.j] += e.w;
  }
  return d;
}

linalg::Mat shift_matrix(const Graph& g, ShiftKind kind) {
  const int n = g.order;
  linalg::Mat w(n, n, 0.0);
  for (const Edge& e : g.edges) {
    w(e.i, e.j) = e.w;
    w(e.j, e.i) = e.w;
  }
  if (kind == ShiftKind::adjacency) return w;

  const std::vector<double> deg = degrees(g);
  if (kind == ShiftKind::laplacian) {
    linalg::Mat l(n, n, 0.0);
    for (int i = 0; i < n; ++i) l(i, i) = deg[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) l(i, j) = -w(i, j);
    return l;
  }

  // sym_normalized_laplacian
  for (int i = 0; i < n; ++i)
    if (!(deg[i] > 0.0))
      throw InvalidInput("shift_matrix: vertex " + std::to_string(i + 1) +
                         " has zero degree; normalized Laplacian undefined");
  linalg::Mat l(n, n, 0.0);
  for (int i = 0; i < n; ++i) l(i, i) = 1.0;
  for (const Edge& e : g.edges) {
    const double v = e.w / std::sqrt(deg[e.i] * deg[e.j]);
    l(e.i, e.j) = -v;
    l(e.j, e.i) = -v;
  }
  return l;
}

std::vector<linalg::Mat> shift_matrices(const Graph& g,
                                        const std::vector<ShiftKind>& kinds) {
  std::vector<linalg::Mat> out;
  out.reserve(kinds.size());
  for (ShiftKind k : kinds) out.push_back(shift_matrix(g, k));
  return out;
}

int geodesic(const Graph& g, int i, int j) {
  if (i < 0 || i >= g.order || j < 0 || j >= g.order)
    throw InvalidInput("geodesic: vertex out of range");
  if (i == j) return 0;
  std::vector<std::vector<int>> adj(g.order);
  for (const Edge& e : g.edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<int> dist(g.order, -1);
  std::queue<int> q;
  q.push(i);
  dist[i] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        if (v == j) return dist[v];
        q.push(v);
      }
    }
  }
  throw InvalidInput("geodesic: vertex " + std::to_string(j + 1) +
                     " unreachable from " + std::to_string(i + 1));
}

std::string to_json(const Graph& g) {
  nlohmann::json out;
  out["order"] = g.order;
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges)
    edges.push_back(nlohmann::json::array({e.i + 1, e.j + 1, e.w}));
  out["edges"] = std::move(edges);
  if (!g.coords.empty()) out["coords"] = g.coords;
  out["connected"] = g.connected;
  return out.dump();
}

Graph graph_from_json(const std::string& text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("graph_from_json: parse failure: ") + e.what());
  }
  if (!in.contains("order") || !in.contains("edges"))
    throw InvalidInput("graph_from_json: need fields 'order' and 'edges'");
  const int order = in["order"].get<int>();
  std::vector<Edge> edges;
  for (const auto& row : in["edges"]) {
    if (!row.is_array() || row.size() != 3)
      throw InvalidInput("graph_from_json: edge rows are [i, j, w]");
    edges.push_back({row[0].get<int>() - 1, row[1].get<int>() - 1, row[2].get<double>()});
  }
  std::vector<std::vector<double>> coords;
  if (in.contains("coords")) coords = in["coords"].get<std::vector<std::vector<double>>>();
  return make_graph(order, std::move(edges), std::move(coords));
}

}  // namespace gclab::graph
