#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lsrb/fem.hpp"

namespace lsrb {

struct EigResult {
  double value = 0.0;
  Vec vector;             // M-normalized
  double residual = 0.0;  // ||A v - value M v||_2
  int iterations = 0;
  // Certified bracket around the extremal eigenvalue: the lower end is backed
  // by a completed Cholesky factorization of A - s M (so s is strictly on the
  // definite side), the upper end by an evaluated Rayleigh quotient.
  double certified_below = -std::numeric_limits<double>::infinity();
  double certified_above = std::numeric_limits<double>::infinity();
};

// Smallest eigenvalue of the symmetric pencil (A, M), M SPD. Shift-invert
// iterations interleaved with shift bisection; Cholesky success/failure at a
// trial shift decides which side of lambda_min it lies on, so the bracket
// converges even when the bottom of the spectrum is a tight cluster.
EigResult eig_smallest(const SpMat& A, const SpMat& M, double tol = 1e-10, int max_iter = 20000,
                       std::uint64_t seed = 0);

// Largest eigenvalue, computed as -eig_smallest(-A, M).
EigResult eig_largest(const SpMat& A, const SpMat& M, double tol = 1e-10, int max_iter = 20000,
                      std::uint64_t seed = 0);

struct LinearProgram {
  Vec objective;
  std::vector<std::array<double, 2>> bounds;  // per-variable box, +-inf allowed
  Mat rows;                                   // general constraints rows * y >= rhs
  Vec rhs;
};

struct LpInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LpUnbounded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LpResult {
  double value = 0.0;
  Vec point;
};

// Dense two-phase primal simplex with Bland's rule.
LpResult lp_min(const LinearProgram& lp);

}  // namespace lsrb
