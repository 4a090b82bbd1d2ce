#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "lsrb/scm.hpp"

using namespace lsrb;

namespace {

const double kAlpha1d = 0.66133702479413711;

ParamVec random_mu(const ParamBox& box, std::mt19937_64& rng) {
  ParamVec mu(box.dim());
  for (int d = 0; d < box.dim(); ++d) {
    std::uniform_real_distribution<double> U(std::log(box.range[d][0]),
                                             std::log(box.range[d][1]));
    mu[d] = std::exp(U(rng));
  }
  return mu;
}

// dense spectrum of the free-dof pencil (A_k, M) as the oracle for the box
Vec component_spectrum(const ProblemDef& p, int k) {
  SpMat Af = submatrix(p.op_x.mats[k], p.space_x.free_dofs);
  SpMat Mf = submatrix(p.gram_x, p.space_x.free_dofs);
  Mat Ad = Mat(Af), Md = Mat(Mf);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Ad, Md);
  return es.eigenvalues();
}

ScmModel truncated(const ScmModel& m, int anchors) {
  ScmModel t = m;
  t.anchor_theta.resize(anchors);
  t.anchor_rhs.resize(anchors);
  t.anchor_alpha.resize(anchors);
  t.anchor_mu.resize(anchors);
  t.ray_points.resize(anchors);
  return t;
}

}  // namespace

TEST_CASE("single component problem is exact after one anchor") {
  ProblemDef p = poisson_1d(16, 1);
  ScmModel m = scm_offline(p, {ParamVec{}}, 0.3, 5);
  CHECK(m.box.size() == 1);
  CHECK(m.anchor_theta.size() == 1);
  CHECK(m.eig_count == 3);
  CHECK(m.eps_achieved >= 0.0);
  CHECK(m.eps_achieved <= 1e-6);

  double ah = alpha_h(p, {}).value;
  double lb = alpha_lb(m, p, {});
  CHECK(lb <= ah + 1e-10);
  CHECK(lb == doctest::Approx(ah).epsilon(1e-6));
  CHECK(ah >= kAlpha1d);
}

TEST_CASE("lower bound is sound on a validation set") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto cand = sample_training_set(p, 25, 0);
  ScmModel m = scm_offline(p, cand, 0.3, 5);
  CHECK(m.box.size() == 3);

  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    ParamVec mu = random_mu(p.box, rng);
    double lb = alpha_lb(m, p, mu);
    double ah = alpha_h(p, mu).value;
    CHECK(lb <= ah + 1e-10);
  }
}

TEST_CASE("lower bound is sound for the three parameter family") {
  ProblemDef p = thermal_block_3p(4, 1);
  auto cand = sample_training_set(p, 20, 9);
  ScmModel m = scm_offline(p, cand, 0.3, 5);
  CHECK(m.box.size() == 7);
  CHECK(m.anchor_theta.size() >= 1);

  std::mt19937_64 rng(33);
  for (int t = 0; t < 20; ++t) {
    ParamVec mu = random_mu(p.box, rng);
    double lb = alpha_lb(m, p, mu);
    double ah = alpha_h(p, mu).value;
    CHECK(lb <= ah + 1e-10);
    double ub = alpha_ub(m, eval_thetas(p.op_x.theta, mu));
    CHECK(ah <= ub + 1e-9 * (1.0 + std::abs(ub)));
  }
}

TEST_CASE("anchor constraints pin the bound at anchor parameters") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto cand = sample_training_set(p, 25, 0);
  ScmModel m = scm_offline(p, cand, 0.3, 5);
  REQUIRE(m.anchor_theta.size() >= 2);
  for (size_t i = 0; i < m.anchor_theta.size(); ++i) {
    double lb = alpha_lb(m, m.anchor_theta[i]);
    CHECK(lb <= m.anchor_alpha[i] + 1e-12);
    CHECK(lb >= m.anchor_rhs[i] - 1e-12 * (1.0 + std::abs(m.anchor_rhs[i])));
    CHECK(lb == doctest::Approx(m.anchor_alpha[i]).epsilon(1e-6));
  }
}

TEST_CASE("rayleigh points lie inside the box") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto cand = sample_training_set(p, 25, 0);
  ScmModel m = scm_offline(p, cand, 0.3, 5);
  for (const auto& y : m.ray_points) {
    REQUIRE(y.size() == m.box.size());
    for (size_t k = 0; k < y.size(); ++k) {
      CHECK(y[k] >= m.box[k][0]);
      CHECK(y[k] <= m.box[k][1]);
    }
  }
}

TEST_CASE("component box brackets the dense spectrum") {
  ProblemDef p = thermal_block_1p(2, 1);
  ScmModel m = scm_offline(p, sample_training_set(p, 5, 0), 0.9, 5);
  for (int k = 0; k < 3; ++k) {
    Vec spec = component_spectrum(p, k);
    double lo = spec.minCoeff(), hi = spec.maxCoeff();
    CHECK(m.box[k][0] <= lo + 1e-10 * (1.0 + std::abs(lo)));
    CHECK(m.box[k][1] >= hi - 1e-10 * (1.0 + std::abs(hi)));
    CHECK(m.box[k][0] >= lo - 1e-6 * (1.0 + std::abs(lo)));
    CHECK(m.box[k][1] <= hi + 1e-6 * (1.0 + std::abs(hi)));
  }
}

TEST_CASE("greedy gap log is monotone and meets the tolerance") {
  ProblemDef p = thermal_block_1p(8, 1);
  auto cand = sample_training_set(p, 50, 0);
  ScmModel m = scm_offline(p, cand, 0.3, 5);

  REQUIRE(m.gap_log.size() >= 2);
  for (size_t j = 0; j + 1 < m.gap_log.size(); ++j)
    CHECK(m.gap_log[j + 1] <= m.gap_log[j] * (1.0 + 1e-12) + 1e-12);
  CHECK(m.gap_log.back() == m.eps_achieved);
  CHECK(m.eps_achieved <= 0.3);

  // gap at termination holds pointwise on the candidate set
  for (const auto& mu : cand) {
    auto th = eval_thetas(p.op_x.theta, mu);
    double ub = alpha_ub(m, th);
    double lb = alpha_lb(m, th);
    CHECK((ub - lb) / ub <= 0.3 + 1e-12);
  }

  // anchor count stays at desk scale
  CHECK(m.anchor_theta.size() >= 2);
  CHECK(m.anchor_theta.size() <= 25);
  CHECK(m.eig_count == 6 + static_cast<int>(m.anchor_theta.size()));
}

TEST_CASE("adding anchors never lowers the bound") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto cand = sample_training_set(p, 25, 0);
  ScmModel m = scm_offline(p, cand, 0.05, 5);
  REQUIRE(m.anchor_theta.size() >= 3);

  std::mt19937_64 rng(37);
  std::vector<std::vector<double>> probes;
  for (int t = 0; t < 10; ++t) probes.push_back(eval_thetas(p.op_x.theta, random_mu(p.box, rng)));

  for (size_t j = 0; j + 1 < m.anchor_theta.size(); ++j) {
    ScmModel a = truncated(m, static_cast<int>(j));
    ScmModel b = truncated(m, static_cast<int>(j) + 1);
    for (const auto& th : probes) {
      double la = alpha_lb(a, th);
      double lb = alpha_lb(b, th);
      CHECK(lb >= la - 1e-10 * (1.0 + std::abs(la)));
    }
  }
}

TEST_CASE("offline run is deterministic under a fixed seed") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto cand = sample_training_set(p, 25, 0);
  ScmModel a = scm_offline(p, cand, 0.3, 5);
  ScmModel b = scm_offline(p, cand, 0.3, 5);
  REQUIRE(a.anchor_mu.size() == b.anchor_mu.size());
  CHECK(a.eps_achieved == b.eps_achieved);
  CHECK(a.eig_count == b.eig_count);
  for (size_t i = 0; i < a.anchor_mu.size(); ++i) {
    CHECK(a.anchor_mu[i][0] == b.anchor_mu[i][0]);
    CHECK(a.anchor_alpha[i] == b.anchor_alpha[i]);
    CHECK(a.anchor_rhs[i] == b.anchor_rhs[i]);
  }
  for (size_t k = 0; k < a.box.size(); ++k) {
    CHECK(a.box[k][0] == b.box[k][0]);
    CHECK(a.box[k][1] == b.box[k][1]);
  }
}

TEST_CASE("discrete coercivity of the reference problems") {
  ProblemDef line = poisson_1d(64, 1);
  double a64 = alpha_h(line, {}).value;
  CHECK(a64 >= kAlpha1d);
  CHECK(a64 <= kAlpha1d + 0.01);

  ProblemDef p = thermal_block_1p(2, 1);
  AlphaH r = alpha_h(p, {1.0});
  SpMat Af = submatrix(p.op_x.assemble({1.0}), p.space_x.free_dofs);
  SpMat Mf = submatrix(p.gram_x, p.space_x.free_dofs);
  Mat Ad = Mat(Af), Md = Mat(Mf);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Ad, Md);
  CHECK(r.value == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-8));
  CHECK(r.residual <= 1e-8 * (1.0 + std::abs(r.value)));
}

TEST_CASE("empty candidate set is rejected") {
  ProblemDef p = thermal_block_1p(4, 1);
  CHECK_THROWS_AS(scm_offline(p, {}, 0.3, 5), std::invalid_argument);
}
