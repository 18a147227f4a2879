#include <queue>

#include "roughlap/geometry.hpp"
#include "roughlap/mesh.hpp"

namespace roughlap::geom {

double interior_metric(const mesh::Mesh& m, int x, int y) {
  const int nv = m.n_vertices();
  if (x < 0 || x >= nv || y < 0 || y >= nv)
    throw std::invalid_argument("interior_metric: vertex id out of range");
  if (x == y) return 0.0;

  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      const double w = dist(m.vertices[a], m.vertices[b]);
      adj[a].push_back({b, w});
      adj[b].push_back({a, w});
    }

  std::vector<double> d(nv, std::numeric_limits<double>::max());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[x] = 0.0;
  pq.push({0.0, x});
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v]) continue;
    if (v == y) return dv;
    for (auto [w, len] : adj[v])
      if (dv + len < d[w]) {
        d[w] = dv + len;
        pq.push({d[w], w});
      }
  }
  throw std::runtime_error("no path");
}

}  // namespace roughlap::geom
