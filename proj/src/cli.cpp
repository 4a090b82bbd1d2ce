#include "lsrb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

namespace lsrb {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string mu_csv(const ParamVec& mu) {
  std::string s;
  for (size_t i = 0; i < mu.size(); ++i) {
    if (i) s += ",";
    s += g17(mu[i]);
  }
  return s;
}

std::string mu_header(int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) {
    if (i) s += ",";
    s += "mu" + std::to_string(i);
  }
  return s;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_csv(const RunConfig& c, const std::string& name, const std::string& command) {
  fs::create_directories(c.out);
  fs::path path = fs::path(c.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "# lsrb " << command << "\n# " << c.provenance() << "\n";
  return f;
}

std::string train_kind_name(const std::string& problem) {
  if (problem == "thermal3") return "lhs+vertices";
  if (problem == "thermal1") return "logspace";
  return "none";
}

struct FullCertificate {
  double err_norm = 0.0, aux_res = 0.0, alpha = 0.0, bound = 0.0;
  Vec u_full;
};

// full-order counterpart of the online certificate, for benchmarking
FullCertificate full_order_certificate(const ProblemDef& p, const ScmModel& scm,
                                       const ParamVec& mu) {
  FullCertificate r;
  r.u_full = full_order_solve(p, mu);
  Vec e_full = full_order_error_solve(p, mu, r.u_full);
  r.err_norm = std::sqrt(e_full.dot(p.gram_z * e_full));
  Vec bx = p.rhs_x.assemble(mu);
  Vec rz = p.rhs_z.assemble(mu);
  auto th = eval_thetas(p.op_z.theta, mu);
  for (size_t k = 0; k < p.op_zx.size(); ++k) rz -= th[k] * (p.op_zx[k] * r.u_full);
  long double rho2 = static_cast<long double>(p.rhs_x.f_norm2(mu));
  for (Eigen::Index i = 0; i < bx.size(); ++i)
    rho2 -= static_cast<long double>(bx[i]) * static_cast<long double>(r.u_full[i]);
  for (Eigen::Index i = 0; i < rz.size(); ++i)
    rho2 -= static_cast<long double>(rz[i]) * static_cast<long double>(e_full[i]);
  r.aux_res = std::sqrt(std::max(static_cast<double>(rho2), 0.0));
  r.alpha = alpha_lb(scm, p, mu);
  r.bound = r.alpha > 0.0 ? tight_bound({r.err_norm, r.aux_res, r.alpha})
                          : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<ParamVec> sample_test_set(const ParamBox& box, int count, std::uint64_t seed) {
  if (box.dim() == 0) return {ParamVec{}};
  if (box.dim() == 1) return sample_log_uniform(box, count, seed);
  return sample_lhs(box, count, seed);
}

}  // namespace

int RunConfig::train_count_effective() const {
  if (train_count > 0) return train_count;
  if (problem == "thermal3") return 75;
  if (problem == "thermal1") return 50;
  return 1;
}

std::string RunConfig::provenance() const {
  std::ostringstream s;
  s << "problem=" << problem << " n=" << n << " z_depth=" << z_depth
    << " train_kind=" << train_kind_name(problem) << " train_count=" << train_count_effective()
    << " train_seed=" << train_seed << " delta0=" << g17(delta0) << " n_max=" << n_max
    << " scm_eps=" << g17(scm_eps) << " scm_seed=" << scm_seed << " test_count=" << test_count
    << " test_seed=" << test_seed << " ref_depth=" << ref_depth << " bench_count=" << bench_count
    << " out=" << out << " model=" << model;
  return s.str();
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "problem")
        base.problem = val;
      else if (key == "n")
        base.n = std::stoi(val);
      else if (key == "z_depth")
        base.z_depth = std::stoi(val);
      else if (key == "train_count")
        base.train_count = std::stoi(val);
      else if (key == "train_seed")
        base.train_seed = std::stoull(val);
      else if (key == "delta0")
        base.delta0 = std::stod(val);
      else if (key == "n_max")
        base.n_max = std::stoi(val);
      else if (key == "scm_eps")
        base.scm_eps = std::stod(val);
      else if (key == "scm_seed")
        base.scm_seed = std::stoull(val);
      else if (key == "test_count")
        base.test_count = std::stoi(val);
      else if (key == "test_seed")
        base.test_seed = std::stoull(val);
      else if (key == "ref_depth")
        base.ref_depth = std::stoi(val);
      else if (key == "bench_count")
        base.bench_count = std::stoi(val);
      else if (key == "out")
        base.out = val;
      else if (key == "model")
        base.model = val;
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  return base;
}

void apply_master_seed(RunConfig& c, std::uint64_t seed) {
  c.train_seed = seed;
  c.test_seed = seed + 1;
  c.scm_seed = seed + 2;
}

ProblemDef make_problem(const RunConfig& c) {
  if (c.problem == "thermal1") return thermal_block_1p(c.n, c.z_depth);
  if (c.problem == "thermal3") return thermal_block_3p(c.n, c.z_depth);
  if (c.problem == "poisson1d") return poisson_1d(c.n, c.z_depth);
  throw std::runtime_error("unknown problem '" + c.problem +
                           "' (expected thermal1, thermal3, or poisson1d)");
}

int cmd_offline(const RunConfig& c, std::ostream& out, std::ostream& err) {
  ProblemDef p = make_problem(c);
  auto train = sample_training_set(p, c.train_count_effective(), c.train_seed);

  auto t0 = Clock::now();
  RbModel model = greedy_offline(p, train, c.delta0, c.n_max, c.scm_seed, c.scm_eps);
  model.offline_seconds = seconds_since(t0);
  model.train_seed = c.train_seed;
  model.train_count = c.train_count_effective();

  fs::create_directories(c.out);
  std::string model_path = (fs::path(c.out) / "model.json").string();
  save_model(model, model_path);

  const int dim = p.box.dim();
  std::ofstream log = open_csv(c, "training_log.csv", "offline");
  log << "# n_basis=" << model.online.n_primal << " delta_final=" << g17(model.online.delta_final)
      << " certified=" << (model.online.certified ? 1 : 0)
      << " scm_anchors=" << model.online.scm.anchor_rhs.size()
      << " scm_eigensolves=" << model.online.scm.eig_count
      << " scm_eps_achieved=" << g17(model.online.scm.eps_achieved) << "\n";
  log << "iter,basis_size";
  for (int d = 0; d < dim; ++d) log << ",chosen_mu" << d;
  log << ",max_estimator,delta,event\n";
  for (const auto& r : model.log) {
    log << r.iter << "," << r.basis_size;
    for (int d = 0; d < dim; ++d)
      log << "," << (r.chosen.empty() ? std::string() : g17(r.chosen[d]));
    log << "," << g17(r.max_estimator) << "," << g17(r.delta) << "," << r.event << "\n";
  }
  log.close();

  out << "offline: problem=" << c.problem << " N=" << model.online.n_primal
      << " delta_final=" << g17(model.online.delta_final)
      << " certified=" << (model.online.certified ? 1 : 0)
      << " train=" << train.size() << " scm_anchors=" << model.online.scm.anchor_rhs.size()
      << " seconds=" << g17(model.offline_seconds) << "\n";
  out << "wrote " << model_path << " and training_log.csv\n";
  if (!model.online.certified) {
    err << "offline: final delta " << g17(model.online.delta_final)
        << " >= 1: model is not certified; refine the mesh or deepen the error space\n";
    return 2;
  }
  return 0;
}

int cmd_online(const RunConfig& c, const ParamVec& mu, std::ostream& out, std::ostream& err) {
  if (c.model.empty()) {
    err << "online: --model is required\n";
    return 2;
  }
  OnlineData od = load_online(c.model);
  if (!od.certified) {
    err << "online: model is not certified (delta_final=" << g17(od.delta_final) << ")\n";
    return 2;
  }
  if (static_cast<int>(mu.size()) != od.box.dim()) {
    err << "online: expected " << od.box.dim() << " parameter value(s), got " << mu.size() << "\n";
    return 2;
  }
  if (od.box.dim() > 0 && !od.box.contains(mu)) {
    err << "online: mu=" << mu_csv(mu) << " outside the parameter box\n";
    return 2;
  }
  OnlineOutput r = online_solve(od, mu);
  out << "problem=" << od.problem << " N=" << od.n_primal
      << " certified=" << (od.certified ? 1 : 0) << "\n";
  out << "mu=" << mu_csv(mu) << "\n";
  out << "c_N=";
  for (Eigen::Index i = 0; i < r.sol.coeffs.size(); ++i)
    out << (i ? "," : "") << g17(r.sol.coeffs[i]);
  out << "\n";
  if (!r.cert) {
    err << "online: certificate unavailable (alpha_lb <= 0 at this mu)\n";
    return 3;
  }
  out << "err_norm=" << g17(r.cert->err_norm) << "\n";
  out << "aux_res=" << g17(r.cert->aux_res) << "\n";
  out << "alpha_lb=" << g17(r.cert->alpha_lb) << "\n";
  out << "bound=" << g17(r.cert->bound) << "\n";
  out << "effectivity_ceiling=" << g17(r.cert->effectivity_ceiling) << "\n";
  if (r.clamped) out << "note=aux_res_clamped\n";
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.model.empty()) {
    err << "sweep: --model is required\n";
    return 2;
  }
  RbModel model = load_model(c.model);
  if (!model.online.certified) {
    err << "sweep: model is not certified (delta_final=" << g17(model.online.delta_final)
        << ")\n";
    return 2;
  }
  RunConfig pc = c;
  pc.problem = model.online.problem;
  pc.n = model.mesh_n;
  pc.z_depth = model.z_depth;
  ProblemDef p = make_problem(pc);
  RefProblem ref = refine_reference(p, c.ref_depth);

  auto tests = sample_test_set(p.box, c.test_count, c.test_seed);
  struct Row {
    ParamVec mu;
    double true_err, bound, err_norm, aux_res, alpha_lb, effectivity;
    std::string flag;
  };
  std::vector<Row> rows;
  int violations = 0;
  double max_eff = 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& mu : tests) {
    SpMat A = ref.op.assemble(mu);
    Vec b = ref.rhs.assemble(mu);
    apply_essential_bc(A, &b, ref.space);
    Vec u_ref = solve_spd(A, b);

    OnlineOutput r = online_solve(model.online, mu);
    Vec u_n = model.basis_x * r.sol.coeffs;
    Vec diff = u_ref - ref.prolong_from_x * u_n;
    double true_err = std::sqrt(diff.dot(ref.gram * diff));

    Row row;
    row.mu = mu;
    row.true_err = true_err;
    if (r.cert) {
      row.bound = r.cert->bound;
      row.err_norm = r.cert->err_norm;
      row.aux_res = r.cert->aux_res;
      row.alpha_lb = r.cert->alpha_lb;
      row.effectivity = true_err > 0.0 ? r.cert->bound / true_err
                                       : std::numeric_limits<double>::infinity();
      row.flag = r.clamped ? "clamped" : "ok";
      if (row.bound < true_err) ++violations;
      if (std::isfinite(row.effectivity)) max_eff = std::max(max_eff, row.effectivity);
    } else {
      row.bound = row.err_norm = row.aux_res = row.alpha_lb = row.effectivity = nan;
      row.flag = "no-cert";
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.true_err < b.true_err; });

  std::ofstream f = open_csv(c, "results.csv", "sweep");
  f << "# N=" << model.online.n_primal << " delta_final=" << g17(model.online.delta_final)
    << " effectivity_ceiling=" << g17(effectivity_ceiling(model.online.delta_final)) << "\n";
  const int dim = p.box.dim();
  if (dim > 0) f << mu_header(dim) << ",";
  f << "true_err,bound,err_norm,aux_res,alpha_lb,effectivity,flag\n";
  for (const auto& r : rows) {
    if (dim > 0) f << mu_csv(r.mu) << ",";
    f << g17(r.true_err) << "," << g17(r.bound) << "," << g17(r.err_norm) << ","
      << g17(r.aux_res) << "," << g17(r.alpha_lb) << "," << g17(r.effectivity) << "," << r.flag
      << "\n";
  }
  f.close();

  out << "sweep: rows=" << rows.size() << " violations=" << violations
      << " max_effectivity=" << g17(max_eff)
      << " ceiling=" << g17(effectivity_ceiling(model.online.delta_final)) << "\n";
  out << "wrote results.csv\n";
  return 0;
}

int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.model.empty()) {
    err << "bench: --model is required\n";
    return 2;
  }
  RbModel model = load_model(c.model);
  if (!model.online.certified) {
    err << "bench: model is not certified\n";
    return 2;
  }
  RunConfig pc = c;
  pc.problem = model.online.problem;
  pc.n = model.mesh_n;
  pc.z_depth = model.z_depth;
  ProblemDef p = make_problem(pc);
  auto queries = sample_test_set(p.box, c.bench_count, c.test_seed);

  double sink = 0.0;
  auto t0 = Clock::now();
  for (const auto& mu : queries) {
    OnlineOutput r = online_solve(model.online, mu);
    sink += r.cert ? r.cert->bound : 0.0;
  }
  double rb_mean = seconds_since(t0) / queries.size();

  t0 = Clock::now();
  for (const auto& mu : queries) {
    FullCertificate r = full_order_certificate(p, model.online.scm, mu);
    sink += r.bound;
  }
  double full_mean = seconds_since(t0) / queries.size();

  double offline_s = model.offline_seconds;
  double speedup = full_mean / rb_mean;
  double breakeven = full_mean > rb_mean ? std::ceil(offline_s / (full_mean - rb_mean))
                                         : std::numeric_limits<double>::infinity();

  std::ofstream f = open_csv(c, "runtime.csv", "bench");
  f << "queries,full_mean_s,rb_mean_s,speedup,offline_s,breakeven_queries\n";
  f << queries.size() << "," << g17(full_mean) << "," << g17(rb_mean) << "," << g17(speedup)
    << "," << g17(offline_s) << "," << g17(breakeven) << "\n";
  f.close();

  out << "bench: queries=" << queries.size() << " full_mean_s=" << g17(full_mean)
      << " rb_mean_s=" << g17(rb_mean) << " speedup=" << g17(speedup)
      << " breakeven_queries=" << g17(breakeven) << "\n";
  out << "wrote runtime.csv (checksum " << g17(sink) << ")\n";
  return 0;
}

int cmd_scm(const RunConfig& c, std::ostream& out, std::ostream&) {
  ProblemDef p = make_problem(c);
  auto candidates = sample_training_set(p, c.train_count_effective(), c.train_seed);
  ScmModel scm = scm_offline(p, candidates, c.scm_eps, c.scm_seed);

  std::ofstream f = open_csv(c, "scm_log.csv", "scm");
  f << "# anchors=" << scm.anchor_rhs.size() << " eigensolves=" << scm.eig_count
    << " eps=" << g17(scm.eps) << " eps_achieved=" << g17(scm.eps_achieved) << "\n";
  f << "round,max_gap\n";
  for (size_t i = 0; i < scm.gap_log.size(); ++i)
    f << (i + 1) << "," << g17(scm.gap_log[i]) << "\n";
  f.close();

  out << "scm: problem=" << c.problem << " candidates=" << candidates.size()
      << " anchors=" << scm.anchor_rhs.size() << " eigensolves=" << scm.eig_count
      << " eps_achieved=" << g17(scm.eps_achieved) << "\n";
  out << "wrote scm_log.csv\n";
  return 0;
}

int cmd_demo_coercivity(const RunConfig& c, int levels, std::ostream& out, std::ostream& err) {
  if (levels < 3) {
    err << "demo coercivity: need at least 3 levels\n";
    return 2;
  }
  const double pi2 = M_PI * M_PI;
  const double alpha_exact = 1.0 - (1.0 + std::sqrt(1.0 + 4.0 * pi2)) / (2.0 * (1.0 + pi2));

  std::ofstream f = open_csv(c, "coercivity.csv", "demo coercivity");
  f << "# alpha_exact=" << g17(alpha_exact) << "\n";
  f << "h,alpha_h,error,observed_order\n";
  double prev_err = 0.0;
  double last_order = 0.0;
  for (int k = 0; k < levels; ++k) {
    int n = 8 << k;
    ProblemDef p = poisson_1d(n);
    double ah = alpha_h(p, {}).value;
    double e = ah - alpha_exact;
    std::string order;
    if (k > 0) {
      last_order = std::log2(prev_err / e);
      order = g17(last_order);
    }
    f << g17(1.0 / n) << "," << g17(ah) << "," << g17(e) << "," << order << "\n";
    prev_err = e;
  }
  f.close();

  out << "demo coercivity: levels=" << levels << " alpha_exact=" << g17(alpha_exact)
      << " finest_order=" << g17(last_order) << "\n";
  out << "wrote coercivity.csv\n";
  return 0;
}

int cmd_demo_tridiag(const RunConfig& c, const std::vector<int>& sizes, std::ostream& out,
                     std::ostream&) {
  std::ofstream f = open_csv(c, "tridiag.csv", "demo tridiag");
  f << "n,error,residual,ratio,lower_bound\n";
  for (int n : sizes) {
    TridiagRecord r = tridiag_demo(n);
    f << r.n << "," << g17(r.error) << "," << g17(r.residual) << "," << g17(r.ratio) << ","
      << g17(r.lower_bound) << "\n";
  }
  f.close();
  out << "demo tridiag: sizes=" << sizes.size() << "\n";
  out << "wrote tridiag.csv\n";
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"lsrb: certified least-squares reduced basis solver"};
  app.require_subcommand(1);

  struct Common {
    std::string config, model, out;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* model_opt = nullptr;
  };
  auto add_common = [](CLI::App* sc, Common& g, bool with_model) {
    sc->add_option("--config", g.config, "key=value config file");
    g.out_opt = sc->add_option("--out", g.out, "output directory");
    g.seed_opt = sc->add_option("--seed", g.seed, "master seed (train S, test S+1, scm S+2)");
    if (with_model) g.model_opt = sc->add_option("--model", g.model, "model file");
  };
  auto resolve = [](const Common& g) {
    RunConfig c;
    if (!g.config.empty()) c = parse_config_file(g.config);
    if (g.seed_opt && g.seed_opt->count()) apply_master_seed(c, g.seed);
    if (g.out_opt && g.out_opt->count()) c.out = g.out;
    if (g.model_opt && g.model_opt->count()) c.model = g.model;
    return c;
  };

  Common g_off, g_on, g_sweep, g_bench, g_scm, g_demo;
  std::string problem_arg, demo_which;
  std::vector<double> mu_args;
  std::vector<int> tridiag_sizes{4, 10, 100, 1000};
  int levels = 6;

  CLI::App* sc_off = app.add_subcommand("offline", "train a reduced model");
  add_common(sc_off, g_off, false);
  sc_off->add_option("problem", problem_arg, "thermal1, thermal3, or poisson1d");

  CLI::App* sc_on = app.add_subcommand("online", "query a reduced model at one parameter");
  add_common(sc_on, g_on, true);
  sc_on->add_option("mu", mu_args, "parameter values");

  CLI::App* sc_sweep = app.add_subcommand("sweep", "validation sweep against a reference mesh");
  add_common(sc_sweep, g_sweep, true);

  CLI::App* sc_bench = app.add_subcommand("bench", "compare online and full-order query cost");
  add_common(sc_bench, g_bench, true);

  CLI::App* sc_scm = app.add_subcommand("scm", "run the coercivity lower-bound construction");
  add_common(sc_scm, g_scm, false);
  sc_scm->add_option("problem", problem_arg, "thermal1, thermal3, or poisson1d");

  CLI::App* sc_demo = app.add_subcommand("demo", "paper demonstrations");
  add_common(sc_demo, g_demo, false);
  sc_demo->add_option("which", demo_which, "coercivity or tridiag")->required();
  sc_demo->add_option("--levels", levels, "coercivity refinement levels");
  sc_demo->add_option("--sizes", tridiag_sizes, "tridiag system sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sc_off->parsed()) {
      RunConfig c = resolve(g_off);
      if (!problem_arg.empty()) c.problem = problem_arg;
      return cmd_offline(c, std::cout, std::cerr);
    }
    if (sc_on->parsed()) return cmd_online(resolve(g_on), mu_args, std::cout, std::cerr);
    if (sc_sweep->parsed()) return cmd_sweep(resolve(g_sweep), std::cout, std::cerr);
    if (sc_bench->parsed()) return cmd_bench(resolve(g_bench), std::cout, std::cerr);
    if (sc_scm->parsed()) {
      RunConfig c = resolve(g_scm);
      if (!problem_arg.empty()) c.problem = problem_arg;
      return cmd_scm(c, std::cout, std::cerr);
    }
    if (sc_demo->parsed()) {
      RunConfig c = resolve(g_demo);
      if (demo_which == "coercivity")
        return cmd_demo_coercivity(c, levels, std::cout, std::cerr);
      if (demo_which == "tridiag")
        return cmd_demo_tridiag(c, tridiag_sizes, std::cout, std::cerr);
      std::cerr << "demo: unknown demonstration '" << demo_which << "'\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "lsrb: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lsrb
