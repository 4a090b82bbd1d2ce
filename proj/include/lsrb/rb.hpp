#pragma once

#include <optional>

#include "lsrb/certify.hpp"
#include "lsrb/scm.hpp"

namespace lsrb {

struct ReducedSolution {
  Vec coeffs;
};

struct Certificate {
  double err_norm = 0.0;   // ||e_hat^N||_X
  double aux_res = 0.0;    // ||rho^N||_Y
  double alpha_lb = 0.0;
  double bound = 0.0;      // err_norm + aux_res / sqrt(alpha_lb)
  double effectivity_ceiling = 0.0;
};

// Everything the online phase needs; sized by N and Q only.
struct OnlineData {
  std::string problem;
  ParamBox box;
  std::vector<Theta> theta_a, theta_f, gram_theta;
  Mat f_gram;
  int n_primal = 0, n_err = 0;
  std::vector<Mat> a_xx;  // per component, primal x primal
  std::vector<Mat> a_ee;  // error x error
  std::vector<Mat> a_ex;  // error x primal
  std::vector<Vec> f_x, f_e;
  ScmModel scm;
  double delta_final = 0.0;
  bool certified = false;
};

struct TrainLogRow {
  int iter = 0;
  int basis_size = 0;
  ParamVec chosen;  // empty when the iteration added no snapshot
  double max_estimator = 0.0;
  double delta = 0.0;
  std::string event;
};

struct RbModel {
  OnlineData online;
  Mat basis_x;  // X-orthonormal primal snapshots, one column each
  Mat basis_z;
  std::vector<ParamVec> selected;
  std::vector<TrainLogRow> log;
  int mesh_n = 0, z_depth = 1;
  std::uint64_t train_seed = 0;
  int train_count = 0;
  double delta0 = 0.1;
  int n_max = 0;
  double scm_eps = 0.3;
  double offline_seconds = 0.0;  // wall time of the offline stage, for amortization
};

Vec full_order_solve(const ProblemDef& p, const ParamVec& mu);
// least-squares error equation on Z with the primal residual as data
Vec full_order_error_solve(const ProblemDef& p, const ParamVec& mu, const Vec& u_full);

struct NearDependence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Modified Gram-Schmidt with one re-orthogonalization pass against the first
// ncols columns; throws NearDependence when the candidate nearly lies in the
// span.
Vec orthonormalize(const Vec& candidate, const Mat& basis, int ncols, const SpMat& gram);

RbModel greedy_offline(const ProblemDef& p, const std::vector<ParamVec>& train, double delta0,
                       int n_max, std::uint64_t seed, double scm_eps = 0.05,
                       const ScmModel* scm = nullptr);

struct OnlineOutput {
  ReducedSolution sol;
  Vec err_coeffs;
  std::optional<Certificate> cert;  // absent when alpha_lb(mu) <= 0
  bool clamped = false;             // rho^2 clamped by more than 1e-12 (f,f)_Y
};

OnlineOutput online_solve(const OnlineData& m, const ParamVec& mu);
std::optional<Certificate> estimate(const OnlineData& m, const ParamVec& mu);

}  // namespace lsrb
