#pragma once

#include "lsrb/linalg.hpp"
#include "lsrb/problems.hpp"

namespace lsrb {

// Successive constraint method state. Boxes are already padded outward and
// anchor right-hand sides already slacked downward by the recorded eigensolver
// residuals, so the online LP stays a rigorous lower bound under numerical
// error.
struct ScmModel {
  std::vector<std::array<double, 2>> box;
  std::vector<std::vector<double>> anchor_theta;
  std::vector<double> anchor_rhs;    // slacked values entering the LP
  std::vector<double> anchor_alpha;  // raw computed alpha_h(mu')
  std::vector<ParamVec> anchor_mu;
  std::vector<std::vector<double>> ray_points;  // Rayleigh coordinates of anchor eigenvectors
  double eps = 0.0;
  double eps_achieved = 0.0;
  int eig_count = 0;
  std::vector<double> gap_log;  // max relative gap at the start of each round
};

ScmModel scm_offline(const ProblemDef& p, const std::vector<ParamVec>& candidates, double eps,
                     std::uint64_t seed = 0);

double alpha_lb(const ScmModel& m, const std::vector<double>& theta);
double alpha_lb(const ScmModel& m, const ProblemDef& p, const ParamVec& mu);
double alpha_ub(const ScmModel& m, const std::vector<double>& theta);

struct AlphaH {
  double value = 0.0;
  Vec vector_free;  // eigenvector on the free dofs, M-normalized
  double residual = 0.0;
};
AlphaH alpha_h(const ProblemDef& p, const ParamVec& mu, std::uint64_t seed = 0);

}  // namespace lsrb
