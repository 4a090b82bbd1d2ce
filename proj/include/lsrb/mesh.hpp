#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace lsrb {

enum class BoundaryTag : int { None = 0, DirichletTop = 1, FluxZero = 2 };

struct EdgeRef {
  int edge = -1;
  int sign = 0;  // +1 if the CCW traversal of the cell runs low->high along the edge
};

// Immutable conforming triangulation. Cells are CCW; edges store sorted vertex
// pairs; cell_edges[c][i] is the edge opposite local vertex i.
struct TriMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<EdgeRef, 3>> cell_edges;
  std::vector<std::array<int, 2>> edge_cells;  // adjacent cells, -1 when absent
  std::vector<int> cell_subdomain;
  std::vector<BoundaryTag> edge_tag;  // None on interior edges

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int cell_count() const { return static_cast<int>(cells.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  bool edge_on_boundary(int e) const { return edge_cells[e][1] < 0; }
  double cell_area(int c) const;
  std::array<double, 2> centroid(int c) const;
  double edge_length(int e) const;
};

// Assembles connectivity, orientation signs, and boundary tags from raw cell
// lists. Boundary edges with both endpoints on y=1 get DirichletTop, the rest
// FluxZero.
TriMesh build_tri_mesh(std::vector<std::array<double, 2>> vertices,
                       std::vector<std::array<int, 3>> cells,
                       std::vector<int> cell_subdomain);

// n x n squares on the unit square, each split along the (0,0)-(1,1) diagonal
// direction; subdomain is sampled at cell centroids.
TriMesh unit_square_mesh(int n, const std::function<int(double, double)>& subdomain);

struct Refinement {
  TriMesh mesh;
  std::vector<int> parent_cell;    // fine cell -> coarse cell
  int coarse_vertex_count = 0;     // fine vertices below this are coarse vertices
  std::vector<int> edge_midpoint;  // coarse edge -> fine vertex at its midpoint
};

// Uniform red refinement: every triangle splits into four congruent children
// via edge midpoints. Child meshes are nested in the parent.
Refinement refine_uniform(const TriMesh& mesh);

struct IntervalMesh {
  std::vector<double> nodes;  // ascending, spanning [0,1]
  int cell_count() const { return static_cast<int>(nodes.size()) - 1; }
  int vertex_count() const { return static_cast<int>(nodes.size()); }
  double h(int c) const { return nodes[c + 1] - nodes[c]; }
};

IntervalMesh interval_mesh(int n);

// vertices.csv and cells.csv under dir, '#'-prefixed provenance header
void dump_mesh_csv(const TriMesh& mesh, const std::string& dir);

}  // namespace lsrb
