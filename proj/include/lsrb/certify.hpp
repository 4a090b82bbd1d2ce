#pragma once

#include "lsrb/linalg.hpp"

namespace lsrb {

struct BoundInputs {
  double err_norm = 0.0;  // ||e_hat||_X
  double aux_res = 0.0;   // ||rho||_Y
  double alpha = 0.0;     // coercivity lower bound
};

// ||r||_Y / sqrt(alpha)
double loose_bound(double residual_norm, double alpha);

// ||e_hat||_X + ||rho||_Y / sqrt(alpha)
double tight_bound(const BoundInputs& in);

// (1 + delta) / (1 - delta); +inf once delta >= 1
double effectivity_ceiling(double delta);

// How pessimistic the loose bound gets: A = tridiag(-1,2,-1), f = e_1 + e_n,
// candidate u_hat_i = 1 + (-1)^i / n against the true solution u = 1.
struct TridiagRecord {
  int n = 0;
  double error = 0.0;      // ||u - u_hat||
  double residual = 0.0;   // ||f - A u_hat||
  double lambda1 = 0.0;    // smallest eigenvalue of A
  double ratio = 0.0;      // (residual / sqrt(lambda1)) / error
  double lower_bound = 0.0;  // 4 sqrt(n-1) / pi
};

TridiagRecord tridiag_demo(int n);

}  // namespace lsrb
