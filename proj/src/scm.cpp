#include "lsrb/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsrb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// guard for LP arithmetic on top of the certified eigenvalue brackets
double lp_guard(double scale) { return 1e-13 * (1.0 + std::abs(scale)); }

LinearProgram make_lp(const ScmModel& m, const std::vector<double>& theta) {
  LinearProgram lp;
  const int q = static_cast<int>(m.box.size());
  lp.objective = Eigen::Map<const Vec>(theta.data(), q);
  lp.bounds = m.box;
  const int na = static_cast<int>(m.anchor_theta.size());
  lp.rows = Mat::Zero(na, q);
  lp.rhs = Vec::Zero(na);
  for (int i = 0; i < na; ++i) {
    for (int k = 0; k < q; ++k) lp.rows(i, k) = m.anchor_theta[i][k];
    lp.rhs[i] = m.anchor_rhs[i];
  }
  return lp;
}

}  // namespace

double alpha_lb(const ScmModel& m, const std::vector<double>& theta) {
  return lp_min(make_lp(m, theta)).value;
}

double alpha_lb(const ScmModel& m, const ProblemDef& p, const ParamVec& mu) {
  return alpha_lb(m, eval_thetas(p.op_x.theta, mu));
}

double alpha_ub(const ScmModel& m, const std::vector<double>& theta) {
  double best = kInf;
  for (const auto& y : m.ray_points) {
    double v = 0.0;
    for (size_t k = 0; k < y.size(); ++k) v += theta[k] * y[k];
    best = std::min(best, v);
  }
  return best;
}

AlphaH alpha_h(const ProblemDef& p, const ParamVec& mu, std::uint64_t seed) {
  SpMat A = p.op_x.assemble(mu);
  SpMat Af = submatrix(A, p.space_x.free_dofs);
  SpMat Mf = submatrix(p.gram_x, p.space_x.free_dofs);
  EigResult r = eig_smallest(Af, Mf, 1e-10, 20000, seed);
  return {r.value, r.vector, r.residual};
}

ScmModel scm_offline(const ProblemDef& p, const std::vector<ParamVec>& candidates, double eps,
                     std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("scm_offline: empty candidate set");
  const int q = p.op_x.q();
  ScmModel m;
  m.eps = eps;

  std::vector<SpMat> comp;
  comp.reserve(q);
  for (const auto& A : p.op_x.mats) comp.push_back(submatrix(A, p.space_x.free_dofs));
  SpMat Mf = submatrix(p.gram_x, p.space_x.free_dofs);

  for (int k = 0; k < q; ++k) {
    EigResult lo = eig_smallest(comp[k], Mf, 1e-10, 20000, seed + k);
    EigResult hi = eig_largest(comp[k], Mf, 1e-10, 20000, seed + k);
    m.box.push_back({lo.certified_below - lp_guard(lo.value),
                     hi.certified_above + lp_guard(hi.value)});
    m.eig_count += 2;
  }

  std::vector<std::vector<double>> theta(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) theta[i] = eval_thetas(p.op_x.theta, candidates[i]);

  std::vector<char> anchored(candidates.size(), 0);
  while (true) {
    double max_gap = -kInf;
    double pick_gap = -kInf;
    int pick = -1;
    for (size_t i = 0; i < candidates.size(); ++i) {
      double ub = alpha_ub(m, theta[i]);
      double gap = kInf;
      if (std::isfinite(ub)) gap = (ub - alpha_lb(m, theta[i])) / ub;
      max_gap = std::max(max_gap, gap);
      if (!anchored[i] && gap > pick_gap) {
        pick_gap = gap;
        pick = static_cast<int>(i);
      }
    }
    m.gap_log.push_back(max_gap);
    if (max_gap <= eps) {
      m.eps_achieved = max_gap;
      break;
    }
    if (pick < 0) {
      // nothing left to anchor; best achievable gap on this candidate set
      m.eps_achieved = max_gap;
      break;
    }

    SpMat A = theta[pick][0] * comp[0];
    for (int k = 1; k < q; ++k) A += theta[pick][k] * comp[k];
    EigResult r = eig_smallest(A, Mf, 1e-10, 20000, seed + 101 + m.eig_count);
    m.eig_count += 1;
    std::vector<double> y(q);
    for (int k = 0; k < q; ++k) y[k] = r.vector.dot(comp[k] * r.vector);
    m.ray_points.push_back(std::move(y));
    m.anchor_theta.push_back(theta[pick]);
    m.anchor_alpha.push_back(r.value);
    m.anchor_rhs.push_back(r.certified_below - lp_guard(r.value));
    m.anchor_mu.push_back(candidates[pick]);
    anchored[pick] = 1;
  }
  return m;
}

}  // namespace lsrb
