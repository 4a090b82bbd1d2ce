#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

#include "lsrb/problems.hpp"

using namespace lsrb;

namespace {

double rel_frob(const SpMat& A, const SpMat& B) {
  SpMat D = A - B;
  return D.norm() / std::max(A.norm(), 1e-300);
}

ParamVec random_mu(const ParamBox& box, std::mt19937_64& rng) {
  ParamVec mu(box.dim());
  for (int d = 0; d < box.dim(); ++d) {
    std::uniform_real_distribution<double> U(std::log(box.range[d][0]),
                                             std::log(box.range[d][1]));
    mu[d] = std::exp(U(rng));
  }
  return mu;
}

// quadrature of int kappa^-1 |q_lift|^2 using mesh subdomain tags only
double f_norm2_by_quadrature(const ProblemDef& p, const ParamVec& mu) {
  const TriMesh& m = *p.mesh_x;
  double acc = 0.0;
  for (int c = 0; c < m.cell_count(); ++c) {
    const auto& v0 = m.vertices[m.cells[c][0]];
    const auto& v1 = m.vertices[m.cells[c][1]];
    const auto& v2 = m.vertices[m.cells[c][2]];
    double cx = (v0[0] + v1[0] + v2[0]) / 3.0;
    double cy = (v0[1] + v1[1] + v2[1]) / 3.0;
    acc += m.cell_area(c) / p.kappa(cx, cy, mu);
  }
  return acc;
}

bool spd_after_bc(const ProblemDef& p, const ParamVec& mu) {
  SpMat A = p.op_x.assemble(mu);
  apply_essential_bc(A, nullptr, p.space_x);
  Eigen::SimplicialLLT<SpMat> llt(A);
  return llt.info() == Eigen::Success;
}

// || f_mu - L_mu z ||_Y^2 through the affine algebra on the Z space
double residual2_affine(const ProblemDef& p, const ParamVec& mu, const Vec& z) {
  SpMat A = p.op_z.assemble(mu);
  Vec b = p.rhs_z.assemble(mu);
  return p.rhs_z.f_norm2(mu) - 2.0 * b.dot(z) + z.dot(A * z);
}

}  // namespace

TEST_CASE("thermal1 affine structure") {
  ProblemDef p = thermal_block_1p(4, 1);
  CHECK(p.name == "thermal1");
  CHECK(p.box.dim() == 1);
  CHECK(p.box.range[0][0] == doctest::Approx(0.1));
  CHECK(p.box.range[0][1] == doctest::Approx(10.0));
  CHECK(p.op_x.q() == 3);
  CHECK(p.rhs_x.q() == 2);

  auto th = eval_thetas(p.op_x.theta, {2.0});
  CHECK(th[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(th[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(th[2] == doctest::Approx(1.0).epsilon(1e-15));

  auto tf = eval_thetas(p.rhs_x.theta, {2.0});
  CHECK(tf[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tf[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("thermal3 affine structure") {
  ProblemDef p = thermal_block_3p(4, 1);
  CHECK(p.name == "thermal3");
  CHECK(p.box.dim() == 3);
  for (int d = 0; d < 3; ++d) {
    CHECK(p.box.range[d][0] == doctest::Approx(0.2));
    CHECK(p.box.range[d][1] == doctest::Approx(5.0));
  }
  CHECK(p.op_x.q() == 7);
  CHECK(p.rhs_x.q() == 4);

  ParamVec mu = {2.0, 4.0, 0.5};
  auto th = eval_thetas(p.op_x.theta, mu);
  CHECK(th[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(th[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(th[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(th[3] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(th[4] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(th[5] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(th[6] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("operator families share thetas across spaces") {
  for (const ProblemDef& p : {thermal_block_1p(4, 1), thermal_block_3p(4, 1)}) {
    REQUIRE(p.op_x.q() == p.op_z.q());
    REQUIRE(static_cast<int>(p.op_zx.size()) == p.op_x.q());
    for (int k = 0; k < p.op_x.q(); ++k) {
      CHECK(p.op_x.theta[k].kind == p.op_z.theta[k].kind);
      CHECK(p.op_x.theta[k].index == p.op_z.theta[k].index);
    }
  }
}

TEST_CASE("cross operator equals Z operator times prolongation") {
  for (const ProblemDef& p : {thermal_block_1p(2, 2), thermal_block_3p(2, 1), poisson_1d(4, 2)}) {
    for (size_t k = 0; k < p.op_zx.size(); ++k) {
      SpMat ref = p.op_z.mats[k] * p.prolong;
      SpMat diff = p.op_zx[k] - ref;
      CHECK(diff.norm() <= 1e-13 * (1.0 + ref.norm()));
    }
  }
}

TEST_CASE("rhs norm closed form thermal1") {
  ProblemDef p = thermal_block_1p(4, 1);
  CHECK(p.rhs_x.f_norm2({2.0}) == doctest::Approx(0.75).epsilon(1e-13));
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    ParamVec mu = random_mu(p.box, rng);
    double expect = 0.5 * (1.0 / mu[0] + 1.0);
    CHECK(p.rhs_x.f_norm2(mu) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(p.rhs_z.f_norm2(mu) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("rhs norm closed form thermal3") {
  ProblemDef p = thermal_block_3p(4, 1);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    ParamVec mu = random_mu(p.box, rng);
    double expect = 0.25 * (1.0 / mu[0] + 1.0 / mu[1] + 1.0 / mu[2] + 1.0);
    CHECK(p.rhs_x.f_norm2(mu) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("f_gram is symmetric positive semidefinite and matches quadrature") {
  for (const ProblemDef& p : {thermal_block_1p(4, 1), thermal_block_3p(4, 1)}) {
    const Mat& G = p.rhs_x.f_gram;
    CHECK((G - G.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> eig(G);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-14);

    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
      ParamVec mu = random_mu(p.box, rng);
      CHECK(p.rhs_x.f_norm2(mu) ==
            doctest::Approx(f_norm2_by_quadrature(p, mu)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kappa piecewise values") {
  ProblemDef p1 = thermal_block_1p(4, 1);
  CHECK(p1.kappa(0.25, 0.7, {3.0}) == doctest::Approx(3.0));
  CHECK(p1.kappa(0.75, 0.2, {3.0}) == doctest::Approx(1.0));

  ProblemDef p3 = thermal_block_3p(4, 1);
  ParamVec mu = {2.0, 3.0, 4.0};
  CHECK(p3.kappa(0.25, 0.25, mu) == doctest::Approx(2.0));
  CHECK(p3.kappa(0.75, 0.25, mu) == doctest::Approx(3.0));
  CHECK(p3.kappa(0.25, 0.75, mu) == doctest::Approx(4.0));
  CHECK(p3.kappa(0.75, 0.75, mu) == doctest::Approx(1.0));
}

TEST_CASE("assembled operator is SPD over the box") {
  std::mt19937_64 rng(17);
  ProblemDef p1 = thermal_block_1p(4, 1);
  for (int t = 0; t < 20; ++t) CHECK(spd_after_bc(p1, random_mu(p1.box, rng)));
  ProblemDef p3 = thermal_block_3p(4, 1);
  for (int t = 0; t < 20; ++t) CHECK(spd_after_bc(p3, random_mu(p3.box, rng)));
}

TEST_CASE("direct assembly matches the affine sum") {
  std::mt19937_64 rng(19);
  for (const ProblemDef& p : {thermal_block_1p(4, 1), thermal_block_3p(4, 1)}) {
    ParamVec ones(p.box.dim(), 1.0);
    auto [A1, b1] = direct_assemble(p, ones);
    CHECK(rel_frob(A1, p.op_x.assemble(ones)) <= 1e-13);
    CHECK((b1 - p.rhs_x.assemble(ones)).norm() <= 1e-13 * (1.0 + b1.norm()));

    for (int t = 0; t < 5; ++t) {
      ParamVec mu = random_mu(p.box, rng);
      auto [A, b] = direct_assemble(p, mu);
      CHECK(rel_frob(A, p.op_x.assemble(mu)) <= 1e-12);
      CHECK((b - p.rhs_x.assemble(mu)).norm() <= 1e-12 * (1.0 + b.norm()));
    }
  }
  ProblemDef p1 = thermal_block_1p(4, 1);
  auto [A01, b01] = direct_assemble(p1, {0.1});
  CHECK(rel_frob(A01, p1.op_x.assemble({0.1})) <= 1e-12);
  CHECK_THROWS_AS(direct_assemble(p1, {20.0}), std::invalid_argument);
  CHECK_THROWS_AS(direct_assemble(p1, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("log spaced training set") {
  ProblemDef p = thermal_block_1p(4, 1);
  auto tr3 = sample_training_set(p, 3, 0);
  REQUIRE(tr3.size() == 3);
  CHECK(tr3[0][0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr3[1][0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tr3[2][0] == doctest::Approx(10.0).epsilon(1e-14));

  auto tr = sample_training_set(p, 50, 0);
  REQUIRE(tr.size() == 50);
  CHECK(tr.front()[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr.back()[0] == doctest::Approx(10.0).epsilon(1e-14));
  double ratio = tr[1][0] / tr[0][0];
  for (size_t i = 1; i + 1 < tr.size(); ++i)
    CHECK(tr[i + 1][0] / tr[i][0] == doctest::Approx(ratio).epsilon(1e-10));
}

TEST_CASE("latin hypercube training set with vertices") {
  ProblemDef p = thermal_block_3p(4, 1);
  const int count = 75;
  auto tr = sample_training_set(p, count, 42);
  REQUIRE(tr.size() == count + 8);

  for (const auto& mu : tr) CHECK(p.box.contains(mu));

  // the 8 box vertices are appended after the samples
  for (int v = 0; v < 8; ++v)
    for (int d = 0; d < 3; ++d)
      CHECK(tr[count + v][d] == p.box.range[d][(v >> d) & 1]);

  // one sample per stratum in every coordinate
  for (int d = 0; d < 3; ++d) {
    std::vector<int> hit(count, 0);
    for (int i = 0; i < count; ++i) {
      double lo = p.box.range[d][0], hi = p.box.range[d][1];
      int s = static_cast<int>((tr[i][d] - lo) / (hi - lo) * count);
      s = std::min(std::max(s, 0), count - 1);
      hit[s] += 1;
    }
    for (int s = 0; s < count; ++s) CHECK(hit[s] == 1);
  }

  auto again = sample_training_set(p, count, 42);
  bool identical = true;
  for (size_t i = 0; i < tr.size(); ++i)
    for (int d = 0; d < 3; ++d) identical = identical && tr[i][d] == again[i][d];
  CHECK(identical);

  auto other = sample_training_set(p, count, 43);
  bool differs = false;
  for (int i = 0; i < count; ++i)
    for (int d = 0; d < 3; ++d) differs = differs || tr[i][d] != other[i][d];
  CHECK(differs);
}

TEST_CASE("log uniform sampler stays in the box and is seeded") {
  ParamBox box{{{0.1, 10.0}, {0.2, 5.0}}};
  auto a = sample_log_uniform(box, 200, 7);
  auto b = sample_log_uniform(box, 200, 7);
  auto c = sample_log_uniform(box, 200, 8);
  REQUIRE(a.size() == 200);
  bool same = true, diff = false;
  for (int i = 0; i < 200; ++i) {
    CHECK(box.contains(a[i]));
    for (int d = 0; d < 2; ++d) {
      same = same && a[i][d] == b[i][d];
      diff = diff || a[i][d] != c[i][d];
    }
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("parameter free problem has a single empty training point") {
  ProblemDef p = poisson_1d(8, 1);
  CHECK(p.box.dim() == 0);
  auto tr = sample_training_set(p, 50, 0);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].empty());
  CHECK(p.op_x.q() == 1);
  CHECK(p.rhs_x.f_norm2({}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quadrature residual matches the affine algebra") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const ProblemDef& p :
       {thermal_block_1p(4, 1), thermal_block_3p(4, 1), poisson_1d(8, 1)}) {
    for (int t = 0; t < 10; ++t) {
      ParamVec mu = p.box.dim() ? random_mu(p.box, rng) : ParamVec{};
      Vec z(p.space_z.dim());
      for (int i = 0; i < z.size(); ++i) z[i] = U(rng);
      double direct = residual_norm_direct(p, mu, z);
      double algebra = std::sqrt(std::max(residual2_affine(p, mu, z), 0.0));
      CHECK(direct == doctest::Approx(algebra).epsilon(1e-10));
    }
    ParamVec mu0 = p.box.dim() ? ParamVec(p.box.dim(), 1.0) : ParamVec{};
    Vec zero = Vec::Zero(p.space_z.dim());
    CHECK(residual_norm_direct(p, mu0, zero) ==
          doctest::Approx(std::sqrt(p.rhs_z.f_norm2(mu0))).epsilon(1e-13));
  }
}

TEST_CASE("reference refinement is consistent with the coarse problem") {
  ProblemDef p = thermal_block_1p(2, 1);
  RefProblem r = refine_reference(p, 2);
  CHECK(r.mesh->cell_count() == 16 * p.mesh_x->cell_count());
  CHECK(r.prolong_from_x.rows() == r.space.dim());
  CHECK(r.prolong_from_x.cols() == p.space_x.dim());

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    ParamVec mu = random_mu(p.box, rng);
    SpMat Ac = p.op_x.assemble(mu);
    SpMat Af = r.op.assemble(mu);
    Vec bc = p.rhs_x.assemble(mu);
    Vec bf = r.rhs.assemble(mu);
    Vec x(p.space_x.dim());
    for (int i = 0; i < x.size(); ++i) x[i] = U(rng);
    Vec px = r.prolong_from_x * x;
    CHECK(px.dot(Af * px) == doctest::Approx(x.dot(Ac * x)).epsilon(1e-12));
    CHECK(bf.dot(px) == doctest::Approx(bc.dot(x)).epsilon(1e-12));
    CHECK(px.dot(r.gram * px) == doctest::Approx(x.dot(p.gram_x * x)).epsilon(1e-12));
  }
}

TEST_CASE("constructor guards") {
  CHECK_THROWS_AS(thermal_block_1p(3), std::invalid_argument);
  CHECK_THROWS_AS(thermal_block_1p(0), std::invalid_argument);
  CHECK_THROWS_AS(thermal_block_1p(4, 0), std::invalid_argument);
  CHECK_THROWS_AS(thermal_block_3p(5), std::invalid_argument);
  CHECK_THROWS_AS(poisson_1d(1), std::invalid_argument);
  CHECK_THROWS_AS(refine_reference(thermal_block_1p(2, 1), 0), std::invalid_argument);
  CHECK_THROWS_AS(refine_reference(poisson_1d(4, 1), 1), std::logic_error);
}

TEST_CASE("parameter box membership") {
  ParamBox box{{{0.1, 10.0}}};
  CHECK(box.contains({0.1}));
  CHECK(box.contains({10.0}));
  CHECK(box.contains({1.0}));
  CHECK_FALSE(box.contains({0.0999}));
  CHECK_FALSE(box.contains({10.001}));
  CHECK_FALSE(box.contains({1.0, 1.0}));
  CHECK_FALSE(box.contains({}));
}
