#pragma once

#include <cstdint>
#include <string>

#include "lsrb/fem.hpp"

namespace lsrb {

using ParamVec = std::vector<double>;

struct ParamBox {
  std::vector<std::array<double, 2>> range;
  int dim() const { return static_cast<int>(range.size()); }
  bool contains(const ParamVec& mu) const;
};

// Serializable scalar parameter function.
struct Theta {
  enum Kind { One, Coord, InvCoord, InvSqrtCoord };
  Kind kind = One;
  int index = 0;
  double eval(const ParamVec& mu) const;
};

std::vector<double> eval_thetas(const std::vector<Theta>& th, const ParamVec& mu);

struct AffineOperator {
  std::vector<Theta> theta;
  std::vector<SpMat> mats;  // raw symmetric components, no boundary conditions
  int q() const { return static_cast<int>(theta.size()); }
  SpMat assemble(const ParamVec& mu) const;
};

struct AffineRhs {
  std::vector<Theta> theta;
  std::vector<Vec> vecs;  // raw components
  // Y-decomposition of f itself; gram_theta' * f_gram * gram_theta = ||f_mu||_Y^2
  std::vector<Theta> gram_theta;
  Mat f_gram;
  int q() const { return static_cast<int>(theta.size()); }
  Vec assemble(const ParamVec& mu) const;
  double f_norm2(const ParamVec& mu) const;
};

struct TrainingSpec {
  enum Kind { LogSpace, LhsPlusVertices };
  Kind kind = LogSpace;
};

struct ProblemDef {
  std::string name;
  ParamBox box;
  std::shared_ptr<const TriMesh> mesh_x, mesh_z;
  std::shared_ptr<const IntervalMesh> line_x, line_z;
  FeSpace space_x, space_z;
  SpMat prolong;  // X -> Z coefficient transfer
  AffineOperator op_x, op_z;
  std::vector<SpMat> op_zx;  // per component: A_k^zz * prolong (Z rows, X cols)
  AffineRhs rhs_x, rhs_z;
  SpMat gram_x, gram_z;  // raw X-norm grams on each space
  TrainingSpec train;
  int mesh_n = 0;
  int z_depth = 1;
  // pointwise diffusion coefficient, used only by the direct-assembly oracle
  std::function<double(double, double, const ParamVec&)> kappa;
};

// kappa = mu on x < 1/2, 1 elsewhere; mu in [0.1, 10]
ProblemDef thermal_block_1p(int n, int z_depth = 3);
// quadrant conductivities (mu1, mu2, mu3, 1); mu in [0.2, 5]^3
ProblemDef thermal_block_3p(int n, int z_depth = 3);
// parameter-free 1d first-order system, used by the coercivity demo and as an
// SCM oracle case
ProblemDef poisson_1d(int n = 16, int z_depth = 3);

// Reassembles A(mu), b(mu) with the coefficient evaluated pointwise in the
// quadrature loop, bypassing the affine decomposition.
std::pair<SpMat, Vec> direct_assemble(const ProblemDef& p, const ParamVec& mu);

// LogSpace: count log-uniform points over the 1d box. LhsPlusVertices: a
// seeded latin hypercube plus the box vertices appended after.
std::vector<ParamVec> sample_training_set(const ProblemDef& p, int count, std::uint64_t seed);

// seeded latin hypercube over the box, no vertices
std::vector<ParamVec> sample_lhs(const ParamBox& box, int count, std::uint64_t seed);
// independent log-uniform draws per coordinate
std::vector<ParamVec> sample_log_uniform(const ParamBox& box, int count, std::uint64_t seed);

// ||f_mu - L_mu z||_Y by elementwise quadrature for a coefficient vector on Z
double residual_norm_direct(const ProblemDef& p, const ParamVec& mu, const Vec& z);

// X-type discretization of the same problem depth more refinements up from
// mesh_x, with the transfer matrix from X, for reference solves
struct RefProblem {
  std::shared_ptr<const TriMesh> mesh;
  FeSpace space;
  AffineOperator op;
  AffineRhs rhs;
  SpMat gram;
  SpMat prolong_from_x;
};
RefProblem refine_reference(const ProblemDef& p, int depth);

}  // namespace lsrb
