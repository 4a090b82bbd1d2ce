#include "lsrb/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>

namespace lsrb {

double TriMesh::cell_area(int c) const {
  const auto& t = cells[c];
  const auto& a = vertices[t[0]];
  const auto& b = vertices[t[1]];
  const auto& d = vertices[t[2]];
  return 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]));
}

std::array<double, 2> TriMesh::centroid(int c) const {
  const auto& t = cells[c];
  return {(vertices[t[0]][0] + vertices[t[1]][0] + vertices[t[2]][0]) / 3.0,
          (vertices[t[0]][1] + vertices[t[1]][1] + vertices[t[2]][1]) / 3.0};
}

double TriMesh::edge_length(int e) const {
  const auto& p = vertices[edges[e][0]];
  const auto& q = vertices[edges[e][1]];
  return std::hypot(q[0] - p[0], q[1] - p[1]);
}

TriMesh build_tri_mesh(std::vector<std::array<double, 2>> vertices,
                       std::vector<std::array<int, 3>> cells,
                       std::vector<int> cell_subdomain) {
  if (cells.size() != cell_subdomain.size())
    throw std::invalid_argument("build_tri_mesh: subdomain list size mismatch");
  TriMesh m;
  m.vertices = std::move(vertices);
  m.cells = std::move(cells);
  m.cell_subdomain = std::move(cell_subdomain);
  m.cell_edges.resize(m.cells.size());

  std::map<std::array<int, 2>, int> edge_id;
  for (int c = 0; c < m.cell_count(); ++c) {
    if (m.cell_area(c) <= 0.0)
      throw std::invalid_argument("build_tri_mesh: cell not CCW or degenerate");
    const auto& t = m.cells[c];
    // local edge i opposite vertex i, traversed CCW
    const std::array<std::array<int, 2>, 3> loc = {{{t[1], t[2]}, {t[2], t[0]}, {t[0], t[1]}}};
    for (int i = 0; i < 3; ++i) {
      int lo = std::min(loc[i][0], loc[i][1]);
      int hi = std::max(loc[i][0], loc[i][1]);
      auto [it, inserted] = edge_id.try_emplace({lo, hi}, static_cast<int>(m.edges.size()));
      if (inserted) {
        m.edges.push_back({lo, hi});
        m.edge_cells.push_back({c, -1});
      } else {
        auto& adj = m.edge_cells[it->second];
        if (adj[1] >= 0) throw std::invalid_argument("build_tri_mesh: non-manifold edge");
        adj[1] = c;
      }
      m.cell_edges[c][i] = {it->second, loc[i][0] == lo ? 1 : -1};
    }
  }

  m.edge_tag.assign(m.edges.size(), BoundaryTag::None);
  constexpr double tol = 1e-12;
  for (int e = 0; e < m.edge_count(); ++e) {
    if (!m.edge_on_boundary(e)) continue;
    const auto& p = m.vertices[m.edges[e][0]];
    const auto& q = m.vertices[m.edges[e][1]];
    bool top = std::abs(p[1] - 1.0) < tol && std::abs(q[1] - 1.0) < tol;
    m.edge_tag[e] = top ? BoundaryTag::DirichletTop : BoundaryTag::FluxZero;
  }
  return m;
}

TriMesh unit_square_mesh(int n, const std::function<int(double, double)>& subdomain) {
  // even n keeps the x,y = 1/2 subdomain interfaces on mesh lines
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("unit_square_mesh: n must be even and at least 2");
  std::vector<std::array<double, 2>> verts;
  verts.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::array<int, 3>> cells;
  cells.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }

  std::vector<int> sub;
  sub.reserve(cells.size());
  for (const auto& t : cells) {
    double cx = (verts[t[0]][0] + verts[t[1]][0] + verts[t[2]][0]) / 3.0;
    double cy = (verts[t[0]][1] + verts[t[1]][1] + verts[t[2]][1]) / 3.0;
    sub.push_back(subdomain ? subdomain(cx, cy) : 0);
  }
  return build_tri_mesh(std::move(verts), std::move(cells), std::move(sub));
}

Refinement refine_uniform(const TriMesh& mesh) {
  Refinement r;
  r.coarse_vertex_count = mesh.vertex_count();
  std::vector<std::array<double, 2>> verts = mesh.vertices;
  r.edge_midpoint.resize(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& p = mesh.vertices[mesh.edges[e][0]];
    const auto& q = mesh.vertices[mesh.edges[e][1]];
    r.edge_midpoint[e] = static_cast<int>(verts.size());
    verts.push_back({0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])});
  }

  std::vector<std::array<int, 3>> cells;
  std::vector<int> sub;
  cells.reserve(static_cast<size_t>(4) * mesh.cell_count());
  r.parent_cell.reserve(cells.capacity());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto& t = mesh.cells[c];
    int m12 = r.edge_midpoint[mesh.cell_edges[c][0].edge];  // opposite v0: (v1,v2)
    int m20 = r.edge_midpoint[mesh.cell_edges[c][1].edge];
    int m01 = r.edge_midpoint[mesh.cell_edges[c][2].edge];
    const std::array<std::array<int, 3>, 4> kids = {{{t[0], m01, m20},
                                                     {m01, t[1], m12},
                                                     {m20, m12, t[2]},
                                                     {m01, m12, m20}}};
    for (const auto& k : kids) {
      cells.push_back(k);
      sub.push_back(mesh.cell_subdomain[c]);
      r.parent_cell.push_back(c);
    }
  }
  r.mesh = build_tri_mesh(std::move(verts), std::move(cells), std::move(sub));
  return r;
}

IntervalMesh interval_mesh(int n) {
  if (n < 1) throw std::invalid_argument("interval_mesh: n must be positive");
  IntervalMesh m;
  m.nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i) m.nodes[i] = static_cast<double>(i) / n;
  return m;
}

void dump_mesh_csv(const TriMesh& mesh, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::FILE* f = std::fopen((fs::path(dir) / "vertices.csv").string().c_str(), "w");
    if (!f) throw std::runtime_error("dump_mesh_csv: cannot open vertices.csv");
    std::fprintf(f, "# lsrb mesh vertices\n");
    std::fprintf(f, "# vertices=%d cells=%d edges=%d\n", mesh.vertex_count(), mesh.cell_count(),
                 mesh.edge_count());
    std::fprintf(f, "id,x,y\n");
    for (int v = 0; v < mesh.vertex_count(); ++v)
      std::fprintf(f, "%d,%.17g,%.17g\n", v, mesh.vertices[v][0], mesh.vertices[v][1]);
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen((fs::path(dir) / "cells.csv").string().c_str(), "w");
    if (!f) throw std::runtime_error("dump_mesh_csv: cannot open cells.csv");
    std::fprintf(f, "# lsrb mesh cells\n");
    std::fprintf(f, "id,v0,v1,v2,subdomain\n");
    for (int c = 0; c < mesh.cell_count(); ++c)
      std::fprintf(f, "%d,%d,%d,%d,%d\n", c, mesh.cells[c][0], mesh.cells[c][1], mesh.cells[c][2],
                   mesh.cell_subdomain[c]);
    std::fclose(f);
  }
}

}  // namespace lsrb
