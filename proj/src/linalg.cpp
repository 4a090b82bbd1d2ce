#include "lsrb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lsrb {

namespace {

Vec seeded_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(n)));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

double m_normalize(Vec& z, const SpMat& M) {
  double n2 = z.dot(M * z);
  if (!(n2 > 0.0)) throw std::runtime_error("eig: vector with nonpositive M-norm");
  double n = std::sqrt(n2);
  z /= n;
  return n;
}

// crude bound on the spectral radius of (A, M) from a short power iteration
double radius_estimate(const SpMat& A, const Eigen::SimplicialLLT<SpMat>& mllt, const SpMat& M,
                       std::uint64_t seed) {
  Vec z = seeded_vector(static_cast<int>(A.rows()), seed);
  m_normalize(z, M);
  double rho = 0.0;
  for (int k = 0; k < 40; ++k) {
    Vec w = mllt.solve(A * z);
    double theta = z.dot(A * z);
    rho = std::max(rho, std::abs(theta));
    double n2 = w.dot(M * w);
    if (!(n2 > 1e-300)) break;  // A z ~ 0, spectrum near zero
    z = w / std::sqrt(n2);
  }
  rho = std::max(rho, std::abs(z.dot(A * z)));
  return 1.5 * rho + 1e-12;
}

}  // namespace

EigResult eig_smallest(const SpMat& A, const SpMat& M, double tol, int max_iter,
                       std::uint64_t seed) {
  SpMat Ac = A, Mc = M;
  Ac.makeCompressed();
  Mc.makeCompressed();
  Eigen::SimplicialLLT<SpMat> mllt(Mc);
  if (mllt.info() != Eigen::Success) throw MatrixNotSpd("eig_smallest: M not SPD");
  double rho = radius_estimate(Ac, mllt, Mc, seed);
  double tol_abs = tol * (1.0 + rho);

  Eigen::SimplicialLLT<SpMat> bllt;
  auto try_shift = [&](double s) {
    SpMat B = Ac - s * Mc;
    bllt.compute(B);
    return bllt.info() == Eigen::Success;
  };

  // grow the shift magnitude until A - s M factorizes; success certifies
  // s < lambda_min
  double lo = -1e-6 * std::max(rho, 1e-12);
  int widen = 0;
  while (!try_shift(lo)) {
    lo *= 4.0;
    if (++widen > 200) throw std::runtime_error("eig_smallest: cannot find definite shift");
  }

  double hi = std::numeric_limits<double>::infinity();
  Vec z = seeded_vector(static_cast<int>(Ac.rows()), seed + 1);
  m_normalize(z, Mc);
  double theta = 0.0, resid = std::numeric_limits<double>::infinity();
  int it = 0, stall = 0;
  bool ok = false;
  while (it < max_iter) {
    for (int k = 0; k < 10 && it < max_iter; ++k, ++it) {
      Vec w = bllt.solve(Mc * z);
      m_normalize(w, Mc);
      z = w;
    }
    theta = z.dot(Ac * z);
    resid = (Ac * z - theta * (Mc * z)).norm();
    hi = std::min(hi, theta);
    if (hi < lo) hi = lo;
    if (resid <= tol_abs) {
      ok = true;
      break;
    }
    double btol = 1e-12 * (1.0 + std::abs(hi));
    if (hi - lo <= btol) {
      // the value is pinned; the vector sits in a tight bottom cluster and
      // its residual will not improve further
      if (++stall >= 2) {
        ok = true;
        break;
      }
      continue;
    }
    stall = 0;
    double s = lo + 0.5 * (hi - lo);
    if (s > lo && s < hi) {
      if (!try_shift(s)) {
        hi = std::min(hi, s);
        if (!try_shift(lo))
          throw std::runtime_error("eig_smallest: certified shift stopped factorizing");
      } else {
        lo = s;
      }
    }
  }
  if (!ok && resid > tol_abs && hi - lo > 1e-9 * (1.0 + std::abs(hi)))
    throw std::runtime_error("eig_smallest: no convergence");

  // tighten the certificate bracket by pure bisection, whatever path converged
  for (int b = 0; b < 120; ++b) {
    if (hi - lo <= 1e-13 * (1.0 + std::abs(hi))) break;
    double s = lo + 0.5 * (hi - lo);
    if (!(s > lo && s < hi)) break;
    if (try_shift(s))
      lo = s;
    else
      hi = std::min(hi, s);
  }

  EigResult res;
  res.value = resid <= tol_abs ? theta : hi;
  res.vector = z;
  res.residual = resid;
  res.iterations = it;
  res.certified_below = lo;
  res.certified_above = hi;
  return res;
}

EigResult eig_largest(const SpMat& A, const SpMat& M, double tol, int max_iter,
                      std::uint64_t seed) {
  SpMat negA = -A;
  EigResult r = eig_smallest(negA, M, tol, max_iter, seed);
  EigResult res;
  res.value = -r.value;
  res.vector = r.vector;
  res.residual = r.residual;
  res.iterations = r.iterations;
  res.certified_below = -r.certified_above;
  res.certified_above = -r.certified_below;
  return res;
}

namespace {

constexpr double kPivTol = 1e-11;

// min obj over the tableau columns in `allowed`, Bland's rule
void simplex_iterate(Mat& T, std::vector<int>& basis, const std::vector<char>& allowed) {
  using Index = Eigen::Index;
  const Index m = T.rows() - 1;
  const Index ncols = T.cols() - 1;
  for (int guard = 0; guard < 100000; ++guard) {
    Index enter = -1;
    for (Index j = 0; j < ncols; ++j)
      if (allowed[j] && T(m, j) < -kPivTol) {
        enter = j;
        break;
      }
    if (enter < 0) return;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i)
      if (T(i, enter) > kPivTol) best = std::min(best, T(i, ncols) / T(i, enter));
    if (!std::isfinite(best))
      throw LpUnbounded("lp_min: objective unbounded below (missing box bound)");
    Index leave = -1;
    for (Index i = 0; i < m; ++i) {
      if (T(i, enter) <= kPivTol) continue;
      double ratio = T(i, ncols) / T(i, enter);
      if (ratio <= best + 1e-13 && (leave < 0 || basis[i] < basis[leave])) leave = i;
    }
    if (leave < 0) throw std::runtime_error("lp_min: ratio test found no pivot row");
    double piv = T(leave, enter);
    T.row(leave) /= piv;
    for (Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = static_cast<int>(enter);
  }
  throw std::runtime_error("lp_min: simplex iteration limit");
}

}  // namespace

LpResult lp_min(const LinearProgram& lp) {
  const int nv = static_cast<int>(lp.objective.size());
  const int nr = static_cast<int>(lp.rhs.size());
  if (static_cast<int>(lp.bounds.size()) != nv || lp.rows.cols() != nv || lp.rows.rows() != nr)
    throw std::invalid_argument("lp_min: inconsistent dimensions");
  const double inf = std::numeric_limits<double>::infinity();

  // substitute each variable by nonnegative ones: y = off + s*x (one column)
  // or y = x+ - x- (two columns)
  struct Sub {
    int col = -1, col2 = -1;
    double off = 0.0, s = 1.0;
  };
  std::vector<Sub> sub(nv);
  int nx = 0;
  for (int j = 0; j < nv; ++j) {
    double lo = lp.bounds[j][0], hi = lp.bounds[j][1];
    if (lo > hi) throw LpInfeasible("lp_min: empty box");
    if (lo > -inf) {
      sub[j] = {nx++, -1, lo, 1.0};
    } else if (hi < inf) {
      sub[j] = {nx++, -1, hi, -1.0};
    } else {
      sub[j] = {nx, nx + 1, 0.0, 1.0};
      nx += 2;
    }
  }

  // rows: general constraints (>=) plus finite upper parts of two-sided boxes
  std::vector<Vec> grows;
  std::vector<double> grhs;  // G x <= h form
  for (int i = 0; i < nr; ++i) {
    Vec row = Vec::Zero(nx);
    double rhs = lp.rhs[i];
    for (int j = 0; j < nv; ++j) {
      double a = lp.rows(i, j);
      if (a == 0.0) continue;
      rhs -= a * sub[j].off;
      row[sub[j].col] += a * sub[j].s;
      if (sub[j].col2 >= 0) row[sub[j].col2] -= a;
    }
    grows.push_back(-row);
    grhs.push_back(-rhs);
  }
  for (int j = 0; j < nv; ++j) {
    double lo = lp.bounds[j][0], hi = lp.bounds[j][1];
    if (lo > -inf && hi < inf) {
      Vec row = Vec::Zero(nx);
      row[sub[j].col] = 1.0;
      grows.push_back(row);
      grhs.push_back(hi - lo);
    }
  }
  const int m = static_cast<int>(grows.size());

  // objective in x
  Vec cx = Vec::Zero(nx);
  double coff = 0.0;
  for (int j = 0; j < nv; ++j) {
    double cj = lp.objective[j];
    coff += cj * sub[j].off;
    cx[sub[j].col] += cj * sub[j].s;
    if (sub[j].col2 >= 0) cx[sub[j].col2] -= cj;
  }

  if (m == 0) {
    // box-only: minimize separably (all x at 0 unless coefficient negative)
    for (int j = 0; j < nx; ++j)
      if (cx[j] < -kPivTol) throw LpUnbounded("lp_min: objective unbounded below (missing box bound)");
    Vec y(nv);
    for (int j = 0; j < nv; ++j) y[j] = sub[j].off;
    return {coff, y};
  }

  // tableau with slacks and artificials; rows normalized to nonnegative rhs
  int nslack = m;
  std::vector<int> art_col(m, -1);
  int nart = 0;
  for (int i = 0; i < m; ++i)
    if (grhs[i] < 0.0) ++nart;
  int ncols = nx + nslack + nart;
  Mat T = Mat::Zero(m + 1, ncols + 1);
  std::vector<int> basis(m);
  int art_at = nx + nslack;
  for (int i = 0; i < m; ++i) {
    double sgn = grhs[i] < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < nx; ++j) T(i, j) = sgn * grows[i][j];
    T(i, nx + i) = sgn;  // slack
    T(i, ncols) = sgn * grhs[i];
    if (sgn < 0.0) {
      art_col[i] = art_at;
      T(i, art_at) = 1.0;
      basis[i] = art_at;
      ++art_at;
    } else {
      basis[i] = nx + i;
    }
  }

  std::vector<char> allowed(ncols, 1);
  if (nart > 0) {
    // phase 1: minimize the artificial sum
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0) T.row(m) -= T.row(i);
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0) T(m, art_col[i]) = 0.0;
    simplex_iterate(T, basis, allowed);
    double p1 = -T(m, ncols);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(grhs[i]));
    if (p1 > 1e-8 * scale) throw LpInfeasible("lp_min: infeasible constraints");
    // pivot basic artificials out or drop their redundant rows
    for (int i = 0; i < m; ++i) {
      if (basis[i] < nx + nslack) continue;
      int piv = -1;
      for (int j = 0; j < nx + nslack; ++j)
        if (std::abs(T(i, j)) > 1e-9) {
          piv = j;
          break;
        }
      if (piv >= 0) {
        double p = T(i, piv);
        T.row(i) /= p;
        for (int r = 0; r <= m; ++r) {
          if (r == i) continue;
          double f = T(r, piv);
          if (f != 0.0) T.row(r) -= f * T.row(i);
        }
        basis[i] = piv;
      } else {
        T.row(i).setZero();
        basis[i] = -1;
      }
    }
    for (int j = nx + nslack; j < ncols; ++j) allowed[j] = 0;
  }

  // phase 2 objective
  T.row(m).setZero();
  for (int j = 0; j < nx; ++j) T(m, j) = cx[j];
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= 0 && T(m, basis[i]) != 0.0) T.row(m) -= T(m, basis[i]) * T.row(i);
  }
  // rows with dropped basis are all-zero and never selected by the ratio test;
  // give them a harmless marker so Bland comparisons stay well defined
  for (int i = 0; i < m; ++i)
    if (basis[i] < 0) basis[i] = ncols;
  simplex_iterate(T, basis, allowed);

  Vec x = Vec::Zero(ncols);
  for (int i = 0; i < m; ++i)
    if (basis[i] < ncols) x[basis[i]] = T(i, ncols);
  Vec y(nv);
  for (int j = 0; j < nv; ++j) {
    double v = sub[j].off + sub[j].s * x[sub[j].col];
    if (sub[j].col2 >= 0) v -= x[sub[j].col2];
    y[j] = v;
  }
  return {lp.objective.dot(y), y};
}

}  // namespace lsrb
