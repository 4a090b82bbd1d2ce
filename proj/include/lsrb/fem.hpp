#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lsrb/mesh.hpp"

namespace lsrb {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SpaceKind { Rt0P1, P1P1Interval };

// Product space for the first-order system (q, u). Dof layout: flux dofs
// first (RT0 edge fluxes, or nodal q in 1d), then scalar vertex dofs.
struct FeSpace {
  SpaceKind kind = SpaceKind::Rt0P1;
  std::shared_ptr<const TriMesh> tri;
  std::shared_ptr<const IntervalMesh> line;
  int n_flux = 0;
  int n_scalar = 0;
  std::vector<int> essential;  // constrained dofs, homogeneous
  std::vector<int> free_dofs;

  int dim() const { return n_flux + n_scalar; }
  int flux_dof(int edge) const { return edge; }
  int scalar_dof(int vertex) const { return n_flux + vertex; }
};

// RT0 x P1 with q.n = 0 on FluxZero edges and u = 0 on DirichletTop vertices
FeSpace make_rt0_p1(std::shared_ptr<const TriMesh> mesh);
// P1 x P1 on the interval with u(0) = u(1) = 0, q unconstrained
FeSpace make_p1_p1(std::shared_ptr<const IntervalMesh> mesh);

enum class FormTerm {
  FluxMass,    // (q, p)
  FluxGrad,    // (q, grad v) + (p, grad u)
  GradGrad,    // (grad u, grad v)
  DivDiv,      // (div q, div p)
  ScalarMass,  // (u, v)
};

struct Region {
  int subdomain = -1;  // -1 matches every cell
  bool contains(int tag) const { return subdomain < 0 || tag == subdomain; }
};

// Symmetric bilinear form over the region, raw (no boundary conditions).
SpMat assemble_form(const FeSpace& space, FormTerm term, Region region = {});

enum class RhsTerm {
  ConstDotFlux,  // (g, v_q)
  ConstDotGrad,  // (g, grad v_u)
  ConstDotDiv,   // (g[0], div v_q)
};

Vec assemble_rhs(const FeSpace& space, RhsTerm term, const std::array<double, 2>& g,
                 Region region = {});

// FluxMass + DivDiv + ScalarMass + GradGrad over the whole domain:
// H(div) x H1 in 2d, H1 x H1 in 1d.
SpMat x_norm_gram(const FeSpace& space);

// Symmetric elimination of the homogeneous essential dofs: zero the rows and
// columns, place a unit diagonal, zero the rhs entries.
void apply_essential_bc(SpMat& A, Vec* b, const FeSpace& space);

// Zero the constrained entries of a residual-type vector.
void zero_essential(Vec& b, const FeSpace& space);

// Coefficient transfer coarse -> fine for nested meshes from refine_uniform.
SpMat prolongation(const FeSpace& coarse, const FeSpace& fine, const Refinement& refinement);

struct MatrixNotSpd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse Cholesky with one step of iterative refinement and a residual check.
Vec solve_spd(const SpMat& A, const Vec& b);

Vec interpolate_rt0(const FeSpace& space,
                    const std::function<std::array<double, 2>(double, double)>& field);
Vec interpolate_p1(const FeSpace& space, const std::function<double(double, double)>& field);

// Pointwise values of a product-space coefficient vector inside cell c.
struct ProductValue {
  std::array<double, 2> q{0.0, 0.0};
  double div_q = 0.0;
  double u = 0.0;
  std::array<double, 2> grad_u{0.0, 0.0};
};
ProductValue eval_in_cell(const FeSpace& space, const Vec& coeffs, int cell, double x, double y);

// Degree-2 exact edge-midpoint rule; weights are cell_area/3.
std::array<std::array<double, 2>, 3> edge_midpoints(const TriMesh& mesh, int cell);

SpMat submatrix(const SpMat& A, const std::vector<int>& keep);

}  // namespace lsrb
