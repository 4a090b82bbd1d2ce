#include "lsrb/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsrb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot_ld(const Vec& a, const Vec& b) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    s += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  return static_cast<double>(s);
}

double f_norm2_ld(const Mat& g, const std::vector<double>& th) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      s += static_cast<long double>(th[i]) * static_cast<long double>(g(i, j)) *
           static_cast<long double>(th[j]);
  return static_cast<double>(s);
}

Vec dense_solve_refined(const Mat& A, const Vec& b) {
  Eigen::PartialPivLU<Mat> lu(A);
  Vec x = lu.solve(b);
  x += lu.solve(b - A * x);
  return x;
}

}  // namespace

Vec full_order_solve(const ProblemDef& p, const ParamVec& mu) {
  SpMat A = p.op_x.assemble(mu);
  Vec b = p.rhs_x.assemble(mu);
  apply_essential_bc(A, &b, p.space_x);
  return solve_spd(A, b);
}

Vec full_order_error_solve(const ProblemDef& p, const ParamVec& mu, const Vec& u_full) {
  SpMat A = p.op_z.assemble(mu);
  Vec r = p.rhs_z.assemble(mu);
  auto th = eval_thetas(p.op_z.theta, mu);
  for (size_t k = 0; k < p.op_zx.size(); ++k) r -= th[k] * (p.op_zx[k] * u_full);
  apply_essential_bc(A, nullptr, p.space_z);
  zero_essential(r, p.space_z);
  return solve_spd(A, r);
}

Vec orthonormalize(const Vec& candidate, const Mat& basis, int ncols, const SpMat& gram) {
  Vec v = candidate;
  double pre = std::sqrt(v.dot(gram * v));
  for (int pass = 0; pass < 2; ++pass)
    for (int j = 0; j < ncols; ++j) {
      double c = basis.col(j).dot(gram * v);
      v -= c * basis.col(j);
    }
  double post = std::sqrt(v.dot(gram * v));
  if (!(post > 1e-10 * pre)) throw NearDependence("orthonormalize: candidate nearly in span");
  return v / post;
}

OnlineOutput online_solve(const OnlineData& m, const ParamVec& mu) {
  if (m.box.dim() > 0 && !m.box.contains(mu))
    throw std::invalid_argument("online_solve: mu outside the parameter box");
  auto tha = eval_thetas(m.theta_a, mu);
  auto thf = eval_thetas(m.theta_f, mu);
  auto thg = eval_thetas(m.gram_theta, mu);
  const int q = static_cast<int>(tha.size());
  const int qf = static_cast<int>(thf.size());

  OnlineOutput out;
  Vec c, chat;
  double b_dot_c = 0.0, bhat_dot_chat = 0.0;
  if (m.n_primal > 0) {
    Mat A = Mat::Zero(m.n_primal, m.n_primal);
    for (int k = 0; k < q; ++k) A += tha[k] * m.a_xx[k];
    Vec b = Vec::Zero(m.n_primal);
    for (int s = 0; s < qf; ++s) b += thf[s] * m.f_x[s];
    c = dense_solve_refined(A, b);
    if (!c.allFinite()) throw std::runtime_error("online_solve: singular reduced primal system");
    b_dot_c = dot_ld(b, c);
  } else {
    c = Vec();
  }
  if (m.n_err > 0) {
    Mat Ah = Mat::Zero(m.n_err, m.n_err);
    for (int k = 0; k < q; ++k) Ah += tha[k] * m.a_ee[k];
    Vec bh = Vec::Zero(m.n_err);
    for (int s = 0; s < qf; ++s) bh += thf[s] * m.f_e[s];
    if (m.n_primal > 0)
      for (int k = 0; k < q; ++k) bh -= tha[k] * (m.a_ex[k] * c);
    chat = dense_solve_refined(Ah, bh);
    if (!chat.allFinite()) throw std::runtime_error("online_solve: singular reduced error system");
    bhat_dot_chat = dot_ld(bh, chat);
  } else {
    chat = Vec();
  }
  out.sol.coeffs = c;
  out.err_coeffs = chat;

  double err = chat.size() > 0 ? chat.norm() : 0.0;
  double ffy = f_norm2_ld(m.f_gram, thg);
  long double rho2l = static_cast<long double>(ffy) - static_cast<long double>(b_dot_c) -
                      static_cast<long double>(bhat_dot_chat);
  double rho2 = static_cast<double>(rho2l);
  if (rho2 < 0.0) {
    if (-rho2 > 1e-12 * ffy) out.clamped = true;
    rho2 = 0.0;
  }
  double rho = std::sqrt(rho2);

  double alpha = alpha_lb(m.scm, tha);
  if (alpha > 0.0) {
    Certificate cert;
    cert.err_norm = err;
    cert.aux_res = rho;
    cert.alpha_lb = alpha;
    cert.bound = tight_bound({err, rho, alpha});
    cert.effectivity_ceiling = effectivity_ceiling(m.delta_final);
    out.cert = cert;
  }
  return out;
}

std::optional<Certificate> estimate(const OnlineData& m, const ParamVec& mu) {
  return online_solve(m, mu).cert;
}

namespace {

struct GreedyState {
  const ProblemDef& p;
  Mat basis_x, basis_z;
  std::vector<Mat> wx, wz, cz;  // per component: A_k^xx Xi, A_k^zz Phi, A_k^zx Xi
  int n = 0;

  explicit GreedyState(const ProblemDef& prob, int n_max) : p(prob) {
    basis_x = Mat::Zero(prob.space_x.dim(), n_max);
    basis_z = Mat::Zero(prob.space_z.dim(), n_max);
    for (int k = 0; k < prob.op_x.q(); ++k) {
      wx.emplace_back(prob.space_x.dim(), n_max);
      wz.emplace_back(prob.space_z.dim(), n_max);
      cz.emplace_back(prob.space_z.dim(), n_max);
    }
  }

  void append(const Vec& xi, const Vec& phi) {
    basis_x.col(n) = xi;
    basis_z.col(n) = phi;
    for (int k = 0; k < p.op_x.q(); ++k) {
      wx[k].col(n) = p.op_x.mats[k] * xi;
      wz[k].col(n) = p.op_z.mats[k] * phi;
      cz[k].col(n) = p.op_zx[k] * xi;
    }
    ++n;
  }

  OnlineData make_online(const ScmModel& scm, double delta, bool certified) const {
    OnlineData od;
    od.problem = p.name;
    od.box = p.box;
    od.theta_a = p.op_x.theta;
    od.theta_f = p.rhs_x.theta;
    od.gram_theta = p.rhs_x.gram_theta;
    od.f_gram = p.rhs_x.f_gram;
    od.n_primal = n;
    od.n_err = n;
    auto X = basis_x.leftCols(n);
    auto Z = basis_z.leftCols(n);
    for (int k = 0; k < p.op_x.q(); ++k) {
      od.a_xx.push_back(X.transpose() * wx[k].leftCols(n));
      od.a_ee.push_back(Z.transpose() * wz[k].leftCols(n));
      od.a_ex.push_back(Z.transpose() * cz[k].leftCols(n));
    }
    for (int s = 0; s < p.rhs_x.q(); ++s) {
      od.f_x.push_back(X.transpose() * p.rhs_x.vecs[s]);
      od.f_e.push_back(Z.transpose() * p.rhs_z.vecs[s]);
    }
    od.scm = scm;
    od.delta_final = delta;
    od.certified = certified;
    return od;
  }
};

}  // namespace

RbModel greedy_offline(const ProblemDef& p, const std::vector<ParamVec>& train, double delta0,
                       int n_max, std::uint64_t seed, double scm_eps, const ScmModel* scm_in) {
  if (train.empty()) throw std::invalid_argument("greedy_offline: empty training set");
  if (n_max < 1) throw std::invalid_argument("greedy_offline: n_max must be positive");
  n_max = std::min<int>(n_max, static_cast<int>(train.size()));

  RbModel model;
  model.delta0 = delta0;
  model.n_max = n_max;
  model.scm_eps = scm_eps;
  model.mesh_n = p.mesh_n;
  model.z_depth = p.z_depth;
  model.train_seed = seed;
  model.train_count = static_cast<int>(train.size());

  ScmModel scm = scm_in ? *scm_in : scm_offline(p, train, scm_eps, seed);

  const int nt = static_cast<int>(train.size());
  std::vector<double> alpha(nt), sq_ffy(nt);
  for (int i = 0; i < nt; ++i) {
    alpha[i] = alpha_lb(scm, p, train[i]);
    if (!(alpha[i] > 0.0))
      throw std::runtime_error("greedy_offline: scm lower bound not positive on a training point");
    sq_ffy[i] = std::sqrt(p.rhs_x.f_norm2(train[i]));
  }

  GreedyState st(p, n_max);
  std::vector<char> selected(nt, 0), exhausted(nt, 0);
  double delta = delta0;
  int iter = 0;
  std::string stop_event;
  double last_max_est = 0.0;

  while (true) {
    ++iter;
    int pick = -1;
    if (st.n == 0) {
      // the greedy is seeded with the first usable training point
      for (int i = 0; i < nt && pick < 0; ++i)
        if (!exhausted[i]) pick = i;
      if (pick < 0) throw std::runtime_error("greedy_offline: no usable seed snapshot");
    } else {
      OnlineData od = st.make_online(scm, delta, true);
      double max_ind = 0.0, max_est = 0.0, pick_est = -kInf;
      for (int i = 0; i < nt; ++i) {
        OnlineOutput out = online_solve(od, train[i]);
        if (!out.cert)
          throw std::runtime_error("greedy_offline: certificate unavailable on a training point");
        double tiny = 1e-14 * (1.0 + sq_ffy[i]);
        double ind;
        if (out.cert->aux_res <= tiny)
          ind = 0.0;
        else if (out.cert->err_norm <= tiny)
          ind = kInf;
        else
          ind = out.cert->aux_res / (std::sqrt(out.cert->alpha_lb) * out.cert->err_norm);
        max_ind = std::max(max_ind, ind);
        max_est = std::max(max_est, out.cert->bound);
        if (!selected[i] && !exhausted[i] && out.cert->bound > pick_est) {
          pick_est = out.cert->bound;
          pick = i;
        }
      }
      last_max_est = max_est;
      // slack absorbs the reduced-vs-full computational path roundoff at the
      // parameter whose full-order indicator set delta
      const double stop_slack = delta * (1.0 + 1e-9);
      if (max_ind <= stop_slack) {
        stop_event = "stop-criterion";
        break;
      }
      if (st.n >= n_max) {
        delta = std::max(delta, max_ind);
        stop_event = "stop-nmax";
        break;
      }
      if (pick < 0) {
        delta = std::max(delta, max_ind);
        stop_event = "stop-exhausted";
        break;
      }
    }

    const ParamVec& mu = train[pick];
    Vec u_full = full_order_solve(p, mu);
    Vec e_full = full_order_error_solve(p, mu, u_full);

    // full-order auxiliary residual via the quadratic identity, then the
    // delta update of Algorithm 1
    double e_norm = std::sqrt(e_full.dot(p.gram_z * e_full));
    Vec bx = p.rhs_x.assemble(mu);
    Vec rz = p.rhs_z.assemble(mu);
    auto th = eval_thetas(p.op_z.theta, mu);
    for (size_t k = 0; k < p.op_zx.size(); ++k) rz -= th[k] * (p.op_zx[k] * u_full);
    double ffy = p.rhs_x.f_norm2(mu);
    long double rho2l = static_cast<long double>(ffy) -
                        static_cast<long double>(dot_ld(bx, u_full)) -
                        static_cast<long double>(dot_ld(rz, e_full));
    double rho_full = std::sqrt(std::max(static_cast<double>(rho2l), 0.0));
    double tiny = 1e-14 * (1.0 + sq_ffy[pick]);
    double ind_full;
    if (rho_full <= tiny)
      ind_full = 0.0;
    else if (e_norm <= tiny)
      ind_full = kInf;
    else
      ind_full = rho_full / (std::sqrt(alpha[pick]) * e_norm);
    bool delta_up = ind_full > delta;
    if (delta_up && std::isfinite(ind_full)) delta = ind_full;

    try {
      Vec xi = orthonormalize(u_full, st.basis_x, st.n, p.gram_x);
      Vec phi = orthonormalize(e_full, st.basis_z, st.n, p.gram_z);
      st.append(xi, phi);
      selected[pick] = 1;
      model.selected.push_back(mu);
      model.log.push_back({iter, st.n, mu, st.n == 1 ? 0.0 : last_max_est, delta,
                           st.n == 1 ? "seed" : (delta_up ? "extend-delta-update" : "extend")});
    } catch (const NearDependence&) {
      exhausted[pick] = 1;
      model.log.push_back({iter, st.n, mu, last_max_est, delta, "reject"});
    }
  }

  model.log.push_back({iter, st.n, {}, last_max_est, delta, stop_event});
  bool certified = delta < 1.0;
  model.online = st.make_online(scm, delta, certified);
  model.basis_x = st.basis_x.leftCols(st.n);
  model.basis_z = st.basis_z.leftCols(st.n);
  return model;
}

}  // namespace lsrb
