#include "lsrb/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lsrb {

namespace {

struct CellGeom {
  std::array<std::array<double, 2>, 3> a;
  double area = 0.0;
  std::array<std::array<double, 2>, 3> grad_lambda;
  std::array<int, 3> edge;
  std::array<double, 3> sign;
  std::array<std::array<double, 2>, 3> qpts;  // edge midpoints, weight area/3
};

CellGeom cell_geom(const TriMesh& mesh, int c) {
  CellGeom g;
  const auto& t = mesh.cells[c];
  for (int i = 0; i < 3; ++i) g.a[i] = mesh.vertices[t[i]];
  g.area = mesh.cell_area(c);
  for (int i = 0; i < 3; ++i) {
    // grad of barycentric i: CCW-rotated opposite edge over twice the area
    const auto& p = g.a[(i + 1) % 3];
    const auto& q = g.a[(i + 2) % 3];
    g.grad_lambda[i] = {-(q[1] - p[1]) / (2.0 * g.area), (q[0] - p[0]) / (2.0 * g.area)};
    g.edge[i] = mesh.cell_edges[c][i].edge;
    g.sign[i] = mesh.cell_edges[c][i].sign;
  }
  g.qpts = {{{0.5 * (g.a[0][0] + g.a[1][0]), 0.5 * (g.a[0][1] + g.a[1][1])},
             {0.5 * (g.a[1][0] + g.a[2][0]), 0.5 * (g.a[1][1] + g.a[2][1])},
             {0.5 * (g.a[2][0] + g.a[0][0]), 0.5 * (g.a[2][1] + g.a[0][1])}}};
  return g;
}

inline std::array<double, 2> rt0_val(const CellGeom& g, int i, double x, double y) {
  double f = g.sign[i] / (2.0 * g.area);
  return {f * (x - g.a[i][0]), f * (y - g.a[i][1])};
}

inline double lambda_val(const CellGeom& g, int i, double x, double y) {
  return 1.0 + g.grad_lambda[i][0] * (x - g.a[i][0]) + g.grad_lambda[i][1] * (y - g.a[i][1]);
}

using Trip = Eigen::Triplet<double>;

void assemble_tri(const FeSpace& sp, FormTerm term, Region region, std::vector<Trip>& out) {
  const TriMesh& mesh = *sp.tri;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    if (!region.contains(mesh.cell_subdomain[c])) continue;
    CellGeom g = cell_geom(mesh, c);
    double w = g.area / 3.0;
    switch (term) {
      case FormTerm::FluxMass:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double v = 0.0;
            for (const auto& p : g.qpts) {
              auto qi = rt0_val(g, i, p[0], p[1]);
              auto qj = rt0_val(g, j, p[0], p[1]);
              v += w * (qi[0] * qj[0] + qi[1] * qj[1]);
            }
            out.emplace_back(sp.flux_dof(g.edge[i]), sp.flux_dof(g.edge[j]), v);
          }
        break;
      case FormTerm::DivDiv:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.emplace_back(sp.flux_dof(g.edge[i]), sp.flux_dof(g.edge[j]),
                             g.sign[i] * g.sign[j] / g.area);
        break;
      case FormTerm::GradGrad:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            out.emplace_back(sp.scalar_dof(mesh.cells[c][i]), sp.scalar_dof(mesh.cells[c][j]),
                             g.area * (g.grad_lambda[i][0] * g.grad_lambda[j][0] +
                                       g.grad_lambda[i][1] * g.grad_lambda[j][1]));
        break;
      case FormTerm::ScalarMass:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double v = 0.0;
            for (const auto& p : g.qpts)
              v += w * lambda_val(g, i, p[0], p[1]) * lambda_val(g, j, p[0], p[1]);
            out.emplace_back(sp.scalar_dof(mesh.cells[c][i]), sp.scalar_dof(mesh.cells[c][j]), v);
          }
        break;
      case FormTerm::FluxGrad:
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double v = 0.0;
            for (const auto& p : g.qpts) {
              auto qi = rt0_val(g, i, p[0], p[1]);
              v += w * (qi[0] * g.grad_lambda[j][0] + qi[1] * g.grad_lambda[j][1]);
            }
            int fd = sp.flux_dof(g.edge[i]);
            int sd = sp.scalar_dof(mesh.cells[c][j]);
            out.emplace_back(fd, sd, v);
            out.emplace_back(sd, fd, v);
          }
        break;
    }
  }
}

void assemble_line(const FeSpace& sp, FormTerm term, std::vector<Trip>& out) {
  const IntervalMesh& mesh = *sp.line;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    double h = mesh.h(c);
    const std::array<int, 2> n = {c, c + 1};
    const double mass[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    const double stiff[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    const double mix[2][2] = {{-0.5, 0.5}, {-0.5, 0.5}};  // int phi_a phi_b'
    switch (term) {
      case FormTerm::FluxMass:
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out.emplace_back(sp.flux_dof(n[a]), sp.flux_dof(n[b]), mass[a][b]);
        break;
      case FormTerm::DivDiv:
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out.emplace_back(sp.flux_dof(n[a]), sp.flux_dof(n[b]), stiff[a][b]);
        break;
      case FormTerm::ScalarMass:
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out.emplace_back(sp.scalar_dof(n[a]), sp.scalar_dof(n[b]), mass[a][b]);
        break;
      case FormTerm::GradGrad:
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out.emplace_back(sp.scalar_dof(n[a]), sp.scalar_dof(n[b]), stiff[a][b]);
        break;
      case FormTerm::FluxGrad:
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            out.emplace_back(sp.flux_dof(n[a]), sp.scalar_dof(n[b]), mix[a][b]);
            out.emplace_back(sp.scalar_dof(n[b]), sp.flux_dof(n[a]), mix[a][b]);
          }
        break;
    }
  }
}

void fill_free(FeSpace& sp) {
  std::sort(sp.essential.begin(), sp.essential.end());
  sp.essential.erase(std::unique(sp.essential.begin(), sp.essential.end()), sp.essential.end());
  std::vector<char> mask(sp.dim(), 0);
  for (int d : sp.essential) mask[d] = 1;
  sp.free_dofs.clear();
  sp.free_dofs.reserve(sp.dim() - sp.essential.size());
  for (int d = 0; d < sp.dim(); ++d)
    if (!mask[d]) sp.free_dofs.push_back(d);
}

}  // namespace

FeSpace make_rt0_p1(std::shared_ptr<const TriMesh> mesh) {
  FeSpace sp;
  sp.kind = SpaceKind::Rt0P1;
  sp.tri = std::move(mesh);
  sp.n_flux = sp.tri->edge_count();
  sp.n_scalar = sp.tri->vertex_count();
  for (int e = 0; e < sp.tri->edge_count(); ++e) {
    if (sp.tri->edge_tag[e] == BoundaryTag::FluxZero) sp.essential.push_back(sp.flux_dof(e));
    if (sp.tri->edge_tag[e] == BoundaryTag::DirichletTop) {
      sp.essential.push_back(sp.scalar_dof(sp.tri->edges[e][0]));
      sp.essential.push_back(sp.scalar_dof(sp.tri->edges[e][1]));
    }
  }
  fill_free(sp);
  return sp;
}

FeSpace make_p1_p1(std::shared_ptr<const IntervalMesh> mesh) {
  FeSpace sp;
  sp.kind = SpaceKind::P1P1Interval;
  sp.line = std::move(mesh);
  sp.n_flux = sp.line->vertex_count();
  sp.n_scalar = sp.line->vertex_count();
  sp.essential = {sp.scalar_dof(0), sp.scalar_dof(sp.line->vertex_count() - 1)};
  fill_free(sp);
  return sp;
}

SpMat assemble_form(const FeSpace& space, FormTerm term, Region region) {
  std::vector<Trip> trip;
  if (space.kind == SpaceKind::Rt0P1)
    assemble_tri(space, term, region, trip);
  else
    assemble_line(space, term, trip);
  SpMat A(space.dim(), space.dim());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

Vec assemble_rhs(const FeSpace& space, RhsTerm term, const std::array<double, 2>& g,
                 Region region) {
  Vec b = Vec::Zero(space.dim());
  if (space.kind == SpaceKind::Rt0P1) {
    const TriMesh& mesh = *space.tri;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      if (!region.contains(mesh.cell_subdomain[c])) continue;
      CellGeom geo = cell_geom(mesh, c);
      double w = geo.area / 3.0;
      switch (term) {
        case RhsTerm::ConstDotFlux:
          for (int i = 0; i < 3; ++i) {
            double v = 0.0;
            for (const auto& p : geo.qpts) {
              auto qi = rt0_val(geo, i, p[0], p[1]);
              v += w * (g[0] * qi[0] + g[1] * qi[1]);
            }
            b[space.flux_dof(geo.edge[i])] += v;
          }
          break;
        case RhsTerm::ConstDotGrad:
          for (int j = 0; j < 3; ++j)
            b[space.scalar_dof(mesh.cells[c][j])] +=
                geo.area * (g[0] * geo.grad_lambda[j][0] + g[1] * geo.grad_lambda[j][1]);
          break;
        case RhsTerm::ConstDotDiv:
          for (int i = 0; i < 3; ++i) b[space.flux_dof(geo.edge[i])] += g[0] * geo.sign[i];
          break;
      }
    }
  } else {
    const IntervalMesh& mesh = *space.line;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      double h = mesh.h(c);
      switch (term) {
        case RhsTerm::ConstDotFlux:
          b[space.flux_dof(c)] += g[0] * h / 2.0;
          b[space.flux_dof(c + 1)] += g[0] * h / 2.0;
          break;
        case RhsTerm::ConstDotGrad:
          b[space.scalar_dof(c)] += -g[0];
          b[space.scalar_dof(c + 1)] += g[0];
          break;
        case RhsTerm::ConstDotDiv:
          b[space.flux_dof(c)] += -g[0];
          b[space.flux_dof(c + 1)] += g[0];
          break;
      }
    }
  }
  return b;
}

SpMat x_norm_gram(const FeSpace& space) {
  SpMat g = assemble_form(space, FormTerm::FluxMass);
  g += assemble_form(space, FormTerm::DivDiv);
  g += assemble_form(space, FormTerm::ScalarMass);
  g += assemble_form(space, FormTerm::GradGrad);
  g.makeCompressed();
  return g;
}

void apply_essential_bc(SpMat& A, Vec* b, const FeSpace& space) {
  std::vector<char> mask(space.dim(), 0);
  for (int d : space.essential) mask[d] = 1;
  std::vector<Trip> trip;
  trip.reserve(A.nonZeros() + space.essential.size());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (!mask[it.row()] && !mask[it.col()]) trip.emplace_back(it.row(), it.col(), it.value());
  for (int d : space.essential) trip.emplace_back(d, d, 1.0);
  SpMat out(A.rows(), A.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  A.swap(out);
  if (b)
    for (int d : space.essential) (*b)[d] = 0.0;
}

void zero_essential(Vec& b, const FeSpace& space) {
  for (int d : space.essential) b[d] = 0.0;
}

SpMat prolongation(const FeSpace& coarse, const FeSpace& fine, const Refinement& refinement) {
  const TriMesh& cm = *coarse.tri;
  const TriMesh& fm = *fine.tri;
  std::vector<Trip> trip;

  // scalar block: vertex identity plus edge-midpoint averaging
  std::vector<int> midpoint_edge(fm.vertex_count(), -1);
  for (int e = 0; e < cm.edge_count(); ++e) midpoint_edge[refinement.edge_midpoint[e]] = e;
  for (int v = 0; v < fm.vertex_count(); ++v) {
    if (v < refinement.coarse_vertex_count) {
      trip.emplace_back(fine.scalar_dof(v), coarse.scalar_dof(v), 1.0);
    } else {
      int e = midpoint_edge[v];
      trip.emplace_back(fine.scalar_dof(v), coarse.scalar_dof(cm.edges[e][0]), 0.5);
      trip.emplace_back(fine.scalar_dof(v), coarse.scalar_dof(cm.edges[e][1]), 0.5);
    }
  }

  // flux block: fine-edge fluxes of the coarse RT0 basis
  for (int f = 0; f < fm.edge_count(); ++f) {
    int cf = fm.edge_cells[f][0];
    int cp = refinement.parent_cell[cf];
    CellGeom g = cell_geom(cm, cp);
    const auto& p = fm.vertices[fm.edges[f][0]];
    const auto& q = fm.vertices[fm.edges[f][1]];
    double len = fm.edge_length(f);
    std::array<double, 2> nrm = {(q[1] - p[1]) / len, -(q[0] - p[0]) / len};
    std::array<double, 2> mid = {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
    for (int j = 0; j < 3; ++j) {
      auto val = rt0_val(g, j, mid[0], mid[1]);
      double flux = len * (val[0] * nrm[0] + val[1] * nrm[1]);
      if (std::abs(flux) > 1e-14) trip.emplace_back(fine.flux_dof(f), coarse.flux_dof(g.edge[j]), flux);
    }
  }

  SpMat P(fine.dim(), coarse.dim());
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

Vec solve_spd(const SpMat& A, const Vec& b) {
  SpMat Ac = A;
  Ac.makeCompressed();
  Eigen::SimplicialLLT<SpMat> llt(Ac);
  if (llt.info() != Eigen::Success) throw MatrixNotSpd("solve_spd: matrix not SPD");
  Vec x = llt.solve(b);
  x += llt.solve(b - Ac * x);
  double denom = std::max(b.norm(), 1e-300);
  double rel = (Ac * x - b).norm() / denom;
  if (rel > 1e-10) throw std::runtime_error("solve_spd: residual check failed");
  return x;
}

Vec interpolate_rt0(const FeSpace& space,
                    const std::function<std::array<double, 2>(double, double)>& field) {
  const TriMesh& mesh = *space.tri;
  Vec c = Vec::Zero(space.dim());
  const double gp = 0.5 / std::sqrt(3.0);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& p = mesh.vertices[mesh.edges[e][0]];
    const auto& q = mesh.vertices[mesh.edges[e][1]];
    double len = mesh.edge_length(e);
    std::array<double, 2> nrm = {(q[1] - p[1]) / len, -(q[0] - p[0]) / len};
    std::array<double, 2> mid = {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
    std::array<double, 2> half = {0.5 * (q[0] - p[0]), 0.5 * (q[1] - p[1])};
    double acc = 0.0;
    for (double s : {-2.0 * gp, 2.0 * gp}) {
      auto v = field(mid[0] + s * half[0], mid[1] + s * half[1]);
      acc += 0.5 * (v[0] * nrm[0] + v[1] * nrm[1]);
    }
    c[space.flux_dof(e)] = len * acc;
  }
  return c;
}

Vec interpolate_p1(const FeSpace& space, const std::function<double(double, double)>& field) {
  const TriMesh& mesh = *space.tri;
  Vec c = Vec::Zero(space.dim());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    c[space.scalar_dof(v)] = field(mesh.vertices[v][0], mesh.vertices[v][1]);
  return c;
}

ProductValue eval_in_cell(const FeSpace& space, const Vec& coeffs, int cell, double x, double y) {
  ProductValue out;
  if (space.kind == SpaceKind::Rt0P1) {
    const TriMesh& mesh = *space.tri;
    CellGeom g = cell_geom(mesh, cell);
    for (int i = 0; i < 3; ++i) {
      double cf = coeffs[space.flux_dof(g.edge[i])];
      auto v = rt0_val(g, i, x, y);
      out.q[0] += cf * v[0];
      out.q[1] += cf * v[1];
      out.div_q += cf * g.sign[i] / g.area;
      double cs = coeffs[space.scalar_dof(mesh.cells[cell][i])];
      out.u += cs * lambda_val(g, i, x, y);
      out.grad_u[0] += cs * g.grad_lambda[i][0];
      out.grad_u[1] += cs * g.grad_lambda[i][1];
    }
  } else {
    const IntervalMesh& mesh = *space.line;
    double h = mesh.h(cell);
    double t = (x - mesh.nodes[cell]) / h;
    double q0 = coeffs[space.flux_dof(cell)], q1 = coeffs[space.flux_dof(cell + 1)];
    double u0 = coeffs[space.scalar_dof(cell)], u1 = coeffs[space.scalar_dof(cell + 1)];
    out.q = {(1.0 - t) * q0 + t * q1, 0.0};
    out.div_q = (q1 - q0) / h;
    out.u = (1.0 - t) * u0 + t * u1;
    out.grad_u = {(u1 - u0) / h, 0.0};
  }
  return out;
}

std::array<std::array<double, 2>, 3> edge_midpoints(const TriMesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  const auto& a0 = mesh.vertices[t[0]];
  const auto& a1 = mesh.vertices[t[1]];
  const auto& a2 = mesh.vertices[t[2]];
  return {{{0.5 * (a0[0] + a1[0]), 0.5 * (a0[1] + a1[1])},
           {0.5 * (a1[0] + a2[0]), 0.5 * (a1[1] + a2[1])},
           {0.5 * (a2[0] + a0[0]), 0.5 * (a2[1] + a0[1])}}};
}

SpMat submatrix(const SpMat& A, const std::vector<int>& keep) {
  std::vector<int> pos(A.rows(), -1);
  for (size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
  std::vector<Trip> trip;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      int r = pos[it.row()], c = pos[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SpMat out(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

}  // namespace lsrb
