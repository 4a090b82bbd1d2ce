#include "lsrb/certify.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lsrb {

double loose_bound(double residual_norm, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("loose_bound: alpha must be positive");
  if (residual_norm < 0.0) throw std::invalid_argument("loose_bound: negative residual norm");
  return residual_norm / std::sqrt(alpha);
}

double tight_bound(const BoundInputs& in) {
  if (in.err_norm < 0.0 || in.aux_res < 0.0)
    throw std::invalid_argument("tight_bound: negative norm input");
  return in.err_norm + loose_bound(in.aux_res, in.alpha);
}

double effectivity_ceiling(double delta) {
  if (delta < 0.0) throw std::invalid_argument("effectivity_ceiling: negative delta");
  if (delta >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 + delta) / (1.0 - delta);
}

TridiagRecord tridiag_demo(int n) {
  if (n < 2) throw std::invalid_argument("tridiag_demo: n must be at least 2");
  std::vector<Eigen::Triplet<double>> ta, tm;
  for (int i = 0; i < n; ++i) {
    ta.emplace_back(i, i, 2.0);
    if (i + 1 < n) {
      ta.emplace_back(i, i + 1, -1.0);
      ta.emplace_back(i + 1, i, -1.0);
    }
    tm.emplace_back(i, i, 1.0);
  }
  SpMat A(n, n), M(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  M.setFromTriplets(tm.begin(), tm.end());

  Vec f = Vec::Zero(n);
  f[0] = 1.0;
  f[n - 1] = 1.0;
  Vec u = solve_spd(A, f);
  Vec u_hat(n);
  for (int i = 0; i < n; ++i)  //u_hat_i = 1 + (-1)^i/n with 1-based i
    u_hat[i] = 1.0 + ((i % 2 == 0) ? -1.0 : 1.0) / n;

  TridiagRecord rec;
  rec.n = n;
  rec.error = (u - u_hat).norm();
  rec.residual = (f - A * u_hat).norm();
  rec.lambda1 = eig_smallest(A, M, 1e-13).value;
  rec.ratio = rec.residual / (std::sqrt(rec.lambda1) * rec.error);
  rec.lower_bound = 4.0 * std::sqrt(static_cast<double>(n) - 1.0) / M_PI;
  return rec;
}

}  // namespace lsrb
