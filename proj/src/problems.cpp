#include "lsrb/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lsrb {

bool ParamBox::contains(const ParamVec& mu) const {
  if (static_cast<int>(mu.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(mu[i] >= range[i][0] && mu[i] <= range[i][1])) return false;
  return true;
}

double Theta::eval(const ParamVec& mu) const {
  if (kind == One) return 1.0;
  if (index < 0 || index >= static_cast<int>(mu.size()))
    throw std::invalid_argument("Theta: parameter index out of range");
  switch (kind) {
    case Coord:
      return mu[index];
    case InvCoord:
      return 1.0 / mu[index];
    case InvSqrtCoord:
      return 1.0 / std::sqrt(mu[index]);
    default:
      return 1.0;
  }
}

std::vector<double> eval_thetas(const std::vector<Theta>& th, const ParamVec& mu) {
  std::vector<double> out(th.size());
  for (size_t i = 0; i < th.size(); ++i) out[i] = th[i].eval(mu);
  return out;
}

SpMat AffineOperator::assemble(const ParamVec& mu) const {
  SpMat A = theta[0].eval(mu) * mats[0];
  for (int k = 1; k < q(); ++k) A += theta[k].eval(mu) * mats[k];
  A.makeCompressed();
  return A;
}

Vec AffineRhs::assemble(const ParamVec& mu) const {
  Vec b = theta[0].eval(mu) * vecs[0];
  for (int m = 1; m < q(); ++m) b += theta[m].eval(mu) * vecs[m];
  return b;
}

double AffineRhs::f_norm2(const ParamVec& mu) const {
  auto g = eval_thetas(gram_theta, mu);
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = 0; j < g.size(); ++j) acc += g[i] * f_gram(i, j) * g[j];
  return acc;
}

namespace {

int subdomain_1p(double x, double /*y*/) { return x < 0.5 ? 1 : 2; }

int subdomain_3p(double x, double y) {
  if (y < 0.5) return x < 0.5 ? 1 : 2;
  return x < 0.5 ? 3 : 4;
}

constexpr std::array<double, 2> kLift = {0.0, -1.0};

// theta list per thermal family: mu_i^-1 and mu_i per subdomain, then 1
AffineOperator thermal_op(const FeSpace& sp, int npar) {
  AffineOperator op;
  for (int i = 0; i < npar; ++i) {
    op.theta.push_back({Theta::InvCoord, i});
    op.mats.push_back(assemble_form(sp, FormTerm::FluxMass, {i + 1}));
    op.theta.push_back({Theta::Coord, i});
    op.mats.push_back(assemble_form(sp, FormTerm::GradGrad, {i + 1}));
  }
  op.theta.push_back({Theta::One, 0});
  SpMat rest = assemble_form(sp, FormTerm::FluxGrad);
  rest += assemble_form(sp, FormTerm::DivDiv);
  rest += assemble_form(sp, FormTerm::FluxMass, {npar + 1});
  rest += assemble_form(sp, FormTerm::GradGrad, {npar + 1});
  rest.makeCompressed();
  op.mats.push_back(rest);
  return op;
}

AffineRhs thermal_rhs(const FeSpace& sp, int npar) {
  const TriMesh& mesh = *sp.tri;
  AffineRhs rhs;
  for (int i = 0; i < npar; ++i) {
    rhs.theta.push_back({Theta::InvCoord, i});
    rhs.vecs.push_back(assemble_rhs(sp, RhsTerm::ConstDotFlux, kLift, {i + 1}));
  }
  rhs.theta.push_back({Theta::One, 0});
  Vec last = assemble_rhs(sp, RhsTerm::ConstDotFlux, kLift, {npar + 1});
  last += assemble_rhs(sp, RhsTerm::ConstDotGrad, kLift);
  rhs.vecs.push_back(last);

  // f = sum_m kappa_m^-1/2 (q_lift 1_{Omega_m}, 0): diagonal gram of region areas
  rhs.f_gram = Mat::Zero(npar + 1, npar + 1);
  for (int c = 0; c < mesh.cell_count(); ++c) {
    int s = mesh.cell_subdomain[c];
    rhs.f_gram(s - 1, s - 1) += mesh.cell_area(c);
  }
  for (int i = 0; i < npar; ++i) rhs.gram_theta.push_back({Theta::InvSqrtCoord, i});
  rhs.gram_theta.push_back({Theta::One, 0});
  return rhs;
}

SpMat interval_prolongation(const FeSpace& coarse, const FeSpace& fine) {
  const int nc = coarse.line->vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  auto block = [&](auto cdof, auto fdof) {
    for (int i = 0; i < nc; ++i) {
      trip.emplace_back(fdof(2 * i), cdof(i), 1.0);
      if (i + 1 < nc) {
        trip.emplace_back(fdof(2 * i + 1), cdof(i), 0.5);
        trip.emplace_back(fdof(2 * i + 1), cdof(i + 1), 0.5);
      }
    }
  };
  block([&](int i) { return coarse.flux_dof(i); }, [&](int i) { return fine.flux_dof(i); });
  block([&](int i) { return coarse.scalar_dof(i); }, [&](int i) { return fine.scalar_dof(i); });
  SpMat P(fine.dim(), coarse.dim());
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

void finish_cross_ops(ProblemDef& p) {
  p.op_zx.clear();
  for (const auto& A : p.op_z.mats) {
    SpMat c = A * p.prolong;
    c.makeCompressed();
    p.op_zx.push_back(std::move(c));
  }
}

ProblemDef build_thermal(std::string name, int n, int z_depth, int npar,
                         int (*subdomain)(double, double), ParamBox box) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("thermal_block: n must be even and at least 2");
  if (z_depth < 1) throw std::invalid_argument("thermal_block: z_depth must be at least 1");
  ProblemDef p;
  p.name = std::move(name);
  p.box = std::move(box);
  p.mesh_n = n;
  p.z_depth = z_depth;
  p.train.kind = npar == 1 ? TrainingSpec::LogSpace : TrainingSpec::LhsPlusVertices;

  p.mesh_x = std::make_shared<TriMesh>(unit_square_mesh(n, subdomain));
  p.space_x = make_rt0_p1(p.mesh_x);

  auto coarse_mesh = p.mesh_x;
  FeSpace coarse_space = p.space_x;
  SpMat chain;
  for (int d = 0; d < z_depth; ++d) {
    Refinement r = refine_uniform(*coarse_mesh);
    auto fine_mesh = std::make_shared<TriMesh>(std::move(r.mesh));
    FeSpace fine_space = make_rt0_p1(fine_mesh);
    SpMat step = prolongation(coarse_space, fine_space, r);
    chain = (d == 0) ? step : SpMat(step * chain);
    coarse_mesh = fine_mesh;
    coarse_space = fine_space;
  }
  p.mesh_z = coarse_mesh;
  p.space_z = coarse_space;
  p.prolong = chain;
  p.prolong.makeCompressed();

  p.op_x = thermal_op(p.space_x, npar);
  p.op_z = thermal_op(p.space_z, npar);
  p.rhs_x = thermal_rhs(p.space_x, npar);
  p.rhs_z = thermal_rhs(p.space_z, npar);
  p.gram_x = x_norm_gram(p.space_x);
  p.gram_z = x_norm_gram(p.space_z);
  finish_cross_ops(p);

  p.kappa = [npar, subdomain](double x, double y, const ParamVec& mu) {
    int s = subdomain(x, y);
    return s <= npar ? mu[s - 1] : 1.0;
  };
  return p;
}

}  // namespace

ProblemDef thermal_block_1p(int n, int z_depth) {
  return build_thermal("thermal1", n, z_depth, 1, subdomain_1p, {{{0.1, 10.0}}});
}

ProblemDef thermal_block_3p(int n, int z_depth) {
  return build_thermal("thermal3", n, z_depth, 3, subdomain_3p,
                       {{{0.2, 5.0}, {0.2, 5.0}, {0.2, 5.0}}});
}

ProblemDef poisson_1d(int n, int z_depth) {
  if (n < 2) throw std::invalid_argument("poisson_1d: n must be at least 2");
  ProblemDef p;
  p.name = "poisson1d";
  p.mesh_n = n;
  p.z_depth = z_depth;
  p.train.kind = TrainingSpec::LogSpace;

  p.line_x = std::make_shared<IntervalMesh>(interval_mesh(n));
  p.space_x = make_p1_p1(p.line_x);
  auto coarse = p.line_x;
  FeSpace cs = p.space_x;
  SpMat chain;
  int nn = n;
  for (int d = 0; d < z_depth; ++d) {
    nn *= 2;
    auto fine = std::make_shared<IntervalMesh>(interval_mesh(nn));
    FeSpace fs = make_p1_p1(fine);
    SpMat step = interval_prolongation(cs, fs);
    chain = (d == 0) ? step : SpMat(step * chain);
    coarse = fine;
    cs = fs;
  }
  p.line_z = coarse;
  p.space_z = cs;
  p.prolong = chain;

  auto one_op = [](const FeSpace& sp) {
    AffineOperator op;
    op.theta.push_back({Theta::One, 0});
    SpMat A = assemble_form(sp, FormTerm::FluxMass);
    A += assemble_form(sp, FormTerm::FluxGrad);
    A += assemble_form(sp, FormTerm::GradGrad);
    A += assemble_form(sp, FormTerm::DivDiv);
    A.makeCompressed();
    op.mats.push_back(A);
    return op;
  };
  auto one_rhs = [](const FeSpace& sp) {
    AffineRhs rhs;
    rhs.theta.push_back({Theta::One, 0});
    rhs.vecs.push_back(assemble_rhs(sp, RhsTerm::ConstDotDiv, {1.0, 0.0}));
    rhs.gram_theta.push_back({Theta::One, 0});
    rhs.f_gram = Mat::Constant(1, 1, 1.0);  // ||(0, 1)||_{L2xL2}^2
    return rhs;
  };
  p.op_x = one_op(p.space_x);
  p.op_z = one_op(p.space_z);
  p.rhs_x = one_rhs(p.space_x);
  p.rhs_z = one_rhs(p.space_z);
  p.gram_x = x_norm_gram(p.space_x);
  p.gram_z = x_norm_gram(p.space_z);
  finish_cross_ops(p);
  return p;
}

namespace {

struct LocalCell {
  std::array<std::array<double, 2>, 3> a;
  double area;
  std::array<std::array<double, 2>, 3> gl;
  std::array<int, 3> edge;
  std::array<double, 3> sign;
  std::array<std::array<double, 2>, 3> qp;
  std::array<double, 2> cen;
};

LocalCell local_cell(const TriMesh& mesh, int c) {
  LocalCell g;
  for (int i = 0; i < 3; ++i) g.a[i] = mesh.vertices[mesh.cells[c][i]];
  g.area = mesh.cell_area(c);
  for (int i = 0; i < 3; ++i) {
    const auto& pp = g.a[(i + 1) % 3];
    const auto& qq = g.a[(i + 2) % 3];
    g.gl[i] = {-(qq[1] - pp[1]) / (2.0 * g.area), (qq[0] - pp[0]) / (2.0 * g.area)};
    g.edge[i] = mesh.cell_edges[c][i].edge;
    g.sign[i] = mesh.cell_edges[c][i].sign;
  }
  g.qp = {{{0.5 * (g.a[0][0] + g.a[1][0]), 0.5 * (g.a[0][1] + g.a[1][1])},
           {0.5 * (g.a[1][0] + g.a[2][0]), 0.5 * (g.a[1][1] + g.a[2][1])},
           {0.5 * (g.a[2][0] + g.a[0][0]), 0.5 * (g.a[2][1] + g.a[0][1])}}};
  g.cen = {(g.a[0][0] + g.a[1][0] + g.a[2][0]) / 3.0, (g.a[0][1] + g.a[1][1] + g.a[2][1]) / 3.0};
  return g;
}

inline std::array<double, 2> rt0_at(const LocalCell& g, int i, double x, double y) {
  double f = g.sign[i] / (2.0 * g.area);
  return {f * (x - g.a[i][0]), f * (y - g.a[i][1])};
}

// nudge quadrature points lying on a subdomain interface to the cell side
inline std::array<double, 2> inward(const LocalCell& g, const std::array<double, 2>& x) {
  constexpr double eps = 1e-9;
  return {x[0] + eps * (g.cen[0] - x[0]), x[1] + eps * (g.cen[1] - x[1])};
}

}  // namespace

std::pair<SpMat, Vec> direct_assemble(const ProblemDef& p, const ParamVec& mu) {
  if (!p.box.contains(mu) && p.box.dim() > 0)
    throw std::invalid_argument("direct_assemble: mu outside the parameter box");
  if (!p.kappa) {
    // parameter-free problem, nothing to bypass
    return {p.op_x.assemble(mu), p.rhs_x.assemble(mu)};
  }
  const TriMesh& mesh = *p.mesh_x;
  const FeSpace& sp = p.space_x;
  std::vector<Eigen::Triplet<double>> trip;
  Vec b = Vec::Zero(sp.dim());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    LocalCell g = local_cell(mesh, c);
    double w = g.area / 3.0;
    for (int qi = 0; qi < 3; ++qi) {
      auto xb = inward(g, g.qp[qi]);
      double kap = p.kappa(xb[0], xb[1], mu);
      std::array<std::array<double, 2>, 3> psi;
      for (int i = 0; i < 3; ++i) psi[i] = rt0_at(g, i, g.qp[qi][0], g.qp[qi][1]);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          double v = w / kap * (psi[i][0] * psi[j][0] + psi[i][1] * psi[j][1]);
          trip.emplace_back(sp.flux_dof(g.edge[i]), sp.flux_dof(g.edge[j]), v);
          double cross = w * (psi[i][0] * g.gl[j][0] + psi[i][1] * g.gl[j][1]);
          trip.emplace_back(sp.flux_dof(g.edge[i]), sp.scalar_dof(mesh.cells[c][j]), cross);
          trip.emplace_back(sp.scalar_dof(mesh.cells[c][j]), sp.flux_dof(g.edge[i]), cross);
          double gg = w * kap * (g.gl[i][0] * g.gl[j][0] + g.gl[i][1] * g.gl[j][1]);
          trip.emplace_back(sp.scalar_dof(mesh.cells[c][i]), sp.scalar_dof(mesh.cells[c][j]), gg);
        }
        double rq = w / kap * (kLift[0] * psi[i][0] + kLift[1] * psi[i][1]);
        b[sp.flux_dof(g.edge[i])] += rq;
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(sp.flux_dof(g.edge[i]), sp.flux_dof(g.edge[j]),
                          g.sign[i] * g.sign[j] / g.area);
      b[sp.scalar_dof(mesh.cells[c][i])] +=
          g.area * (kLift[0] * g.gl[i][0] + kLift[1] * g.gl[i][1]);
    }
  }
  SpMat A(sp.dim(), sp.dim());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return {A, b};
}

std::vector<ParamVec> sample_lhs(const ParamBox& box, int count, std::uint64_t seed) {
  const int dim = box.dim();
  if (dim == 0) return {ParamVec{}};
  if (count < 1) throw std::invalid_argument("sample_lhs: count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<int>> perm(dim);
  for (int d = 0; d < dim; ++d) {
    perm[d].resize(count);
    std::iota(perm[d].begin(), perm[d].end(), 0);
    std::shuffle(perm[d].begin(), perm[d].end(), rng);
  }
  std::vector<ParamVec> out;
  for (int i = 0; i < count; ++i) {
    ParamVec mu(dim);
    for (int d = 0; d < dim; ++d) {
      double lo = box.range[d][0], hi = box.range[d][1];
      mu[d] = lo + (perm[d][i] + unit(rng)) * (hi - lo) / count;
    }
    out.push_back(std::move(mu));
  }
  return out;
}

std::vector<ParamVec> sample_log_uniform(const ParamBox& box, int count, std::uint64_t seed) {
  const int dim = box.dim();
  if (dim == 0) return {ParamVec{}};
  if (count < 1) throw std::invalid_argument("sample_log_uniform: count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<ParamVec> out;
  for (int i = 0; i < count; ++i) {
    ParamVec mu(dim);
    for (int d = 0; d < dim; ++d) {
      double lo = std::log(box.range[d][0]), hi = std::log(box.range[d][1]);
      std::uniform_real_distribution<double> dist(lo, hi);
      mu[d] = std::exp(dist(rng));
    }
    out.push_back(std::move(mu));
  }
  return out;
}

std::vector<ParamVec> sample_training_set(const ProblemDef& p, int count, std::uint64_t seed) {
  const int dim = p.box.dim();
  if (dim == 0) return {ParamVec{}};
  if (count < 1) throw std::invalid_argument("sample_training_set: count must be positive");
  if (p.train.kind == TrainingSpec::LogSpace) {
    std::vector<ParamVec> out;
    double lo = std::log10(p.box.range[0][0]);
    double hi = std::log10(p.box.range[0][1]);
    for (int i = 0; i < count; ++i) {
      double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back({std::pow(10.0, lo + t * (hi - lo))});
    }
    return out;
  }
  std::vector<ParamVec> out = sample_lhs(p.box, count, seed);
  for (int v = 0; v < (1 << dim); ++v) {
    ParamVec mu(dim);
    for (int d = 0; d < dim; ++d) mu[d] = p.box.range[d][(v >> d) & 1];
    out.push_back(std::move(mu));
  }
  return out;
}

double residual_norm_direct(const ProblemDef& p, const ParamVec& mu, const Vec& z) {
  double acc = 0.0;
  if (p.space_z.kind == SpaceKind::Rt0P1) {
    const TriMesh& mesh = *p.mesh_z;
    for (int c = 0; c < mesh.cell_count(); ++c) {
      LocalCell g = local_cell(mesh, c);
      double w = g.area / 3.0;
      for (int qi = 0; qi < 3; ++qi) {
        auto xb = inward(g, g.qp[qi]);
        double kap = p.kappa ? p.kappa(xb[0], xb[1], mu) : 1.0;
        double rk = 1.0 / std::sqrt(kap), sk = std::sqrt(kap);
        ProductValue v = eval_in_cell(p.space_z, z, c, g.qp[qi][0], g.qp[qi][1]);
        double y1x = rk * (kLift[0] - v.q[0]) - sk * v.grad_u[0];
        double y1y = rk * (kLift[1] - v.q[1]) - sk * v.grad_u[1];
        double y2 = -v.div_q;
        acc += w * (y1x * y1x + y1y * y1y + y2 * y2);
      }
    }
  } else {
    const IntervalMesh& mesh = *p.line_z;
    const double gp = 0.5 / std::sqrt(3.0);
    for (int c = 0; c < mesh.cell_count(); ++c) {
      double h = mesh.h(c);
      double xm = 0.5 * (mesh.nodes[c] + mesh.nodes[c + 1]);
      for (double s : {-gp, gp}) {
        ProductValue v = eval_in_cell(p.space_z, z, c, xm + s * h, 0.0);
        double y1 = -(v.q[0] + v.grad_u[0]);
        double y2 = 1.0 - v.div_q;
        acc += 0.5 * h * (y1 * y1 + y2 * y2);
      }
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

RefProblem refine_reference(const ProblemDef& p, int depth) {
  if (!p.mesh_x) throw std::logic_error("refine_reference: 2d problems only");
  if (depth < 1) throw std::invalid_argument("refine_reference: depth must be at least 1");
  RefProblem r;
  auto mesh = p.mesh_x;
  FeSpace space = p.space_x;
  SpMat chain;
  for (int d = 0; d < depth; ++d) {
    Refinement step = refine_uniform(*mesh);
    auto fine_mesh = std::make_shared<TriMesh>(std::move(step.mesh));
    FeSpace fine_space = make_rt0_p1(fine_mesh);
    SpMat P = prolongation(space, fine_space, step);
    chain = (d == 0) ? P : SpMat(P * chain);
    mesh = fine_mesh;
    space = fine_space;
  }
  r.mesh = mesh;
  r.space = space;
  r.prolong_from_x = chain;
  r.prolong_from_x.makeCompressed();
  int npar = p.box.dim();
  r.op = thermal_op(r.space, npar);
  r.rhs = thermal_rhs(r.space, npar);
  r.gram = x_norm_gram(r.space);
  return r;
}

}  // namespace lsrb
