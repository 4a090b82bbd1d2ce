#include "lsrb/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace lsrb {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "lsrb-model-1";

// JSON has no literal for non-finite values (nlohmann would emit null), so
// fields that can legitimately hold them round-trip through strings.
json num_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double num_from_json(const json& j) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::runtime_error("model file: bad numeric string '" + s + "'");
  }
  return j.get<double>();
}

json theta_to_json(const Theta& t) {
  static const char* names[] = {"one", "coord", "inv", "invsqrt"};
  return json{{"kind", names[static_cast<int>(t.kind)]}, {"index", t.index}};
}

Theta theta_from_json(const json& j) {
  Theta t;
  std::string k = j.at("kind").get<std::string>();
  if (k == "one")
    t.kind = Theta::One;
  else if (k == "coord")
    t.kind = Theta::Coord;
  else if (k == "inv")
    t.kind = Theta::InvCoord;
  else if (k == "invsqrt")
    t.kind = Theta::InvSqrtCoord;
  else
    throw std::runtime_error("model file: unknown theta kind '" + k + "'");
  t.index = j.at("index").get<int>();
  return t;
}

json thetas_to_json(const std::vector<Theta>& v) {
  json a = json::array();
  for (const auto& t : v) a.push_back(theta_to_json(t));
  return a;
}

std::vector<Theta> thetas_from_json(const json& j) {
  std::vector<Theta> v;
  for (const auto& e : j) v.push_back(theta_from_json(e));
  return v;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const Eigen::Index nr = static_cast<Eigen::Index>(j.size());
  if (nr == 0) return Mat(0, 0);
  const Eigen::Index nc = static_cast<Eigen::Index>(j.front().size());
  Mat m(nr, nc);
  Eigen::Index i = 0;
  for (const auto& row : j) {
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::runtime_error("model file: ragged matrix rows");
    Eigen::Index k = 0;
    for (const auto& e : row) m(i, k++) = e.get<double>();
    ++i;
  }
  return m;
}

json mats_to_json(const std::vector<Mat>& v) {
  json a = json::array();
  for (const auto& m : v) a.push_back(mat_to_json(m));
  return a;
}

std::vector<Mat> mats_from_json(const json& j) {
  std::vector<Mat> v;
  for (const auto& e : j) v.push_back(mat_from_json(e));
  return v;
}

json vecs_to_json(const std::vector<Vec>& v) {
  json a = json::array();
  for (const auto& e : v) a.push_back(vec_to_json(e));
  return a;
}

std::vector<Vec> vecs_from_json(const json& j) {
  std::vector<Vec> v;
  for (const auto& e : j) v.push_back(vec_from_json(e));
  return v;
}

json scm_to_json(const ScmModel& m) {
  json j;
  j["box"] = m.box;
  j["anchor_theta"] = m.anchor_theta;
  j["anchor_rhs"] = m.anchor_rhs;
  j["anchor_alpha"] = m.anchor_alpha;
  j["anchor_mu"] = m.anchor_mu;
  j["ray_points"] = m.ray_points;
  j["eps"] = m.eps;
  j["eps_achieved"] = num_to_json(m.eps_achieved);
  j["eig_count"] = m.eig_count;
  json gaps = json::array();
  for (double g : m.gap_log) gaps.push_back(num_to_json(g));
  j["gap_log"] = std::move(gaps);
  return j;
}

ScmModel scm_from_json(const json& j) {
  ScmModel m;
  m.box = j.at("box").get<std::vector<std::array<double, 2>>>();
  m.anchor_theta = j.at("anchor_theta").get<std::vector<std::vector<double>>>();
  m.anchor_rhs = j.at("anchor_rhs").get<std::vector<double>>();
  m.anchor_alpha = j.at("anchor_alpha").get<std::vector<double>>();
  m.anchor_mu = j.at("anchor_mu").get<std::vector<ParamVec>>();
  m.ray_points = j.at("ray_points").get<std::vector<std::vector<double>>>();
  m.eps = j.at("eps").get<double>();
  m.eps_achieved = num_from_json(j.at("eps_achieved"));
  m.eig_count = j.at("eig_count").get<int>();
  for (const auto& g : j.at("gap_log")) m.gap_log.push_back(num_from_json(g));
  return m;
}

json online_to_json(const OnlineData& m) {
  json j;
  j["problem"] = m.problem;
  j["box"] = m.box.range;
  j["theta_a"] = thetas_to_json(m.theta_a);
  j["theta_f"] = thetas_to_json(m.theta_f);
  j["gram_theta"] = thetas_to_json(m.gram_theta);
  j["f_gram"] = mat_to_json(m.f_gram);
  j["n_primal"] = m.n_primal;
  j["n_err"] = m.n_err;
  j["a_xx"] = mats_to_json(m.a_xx);
  j["a_ee"] = mats_to_json(m.a_ee);
  j["a_ex"] = mats_to_json(m.a_ex);
  j["f_x"] = vecs_to_json(m.f_x);
  j["f_e"] = vecs_to_json(m.f_e);
  j["scm"] = scm_to_json(m.scm);
  j["delta_final"] = m.delta_final;
  j["certified"] = m.certified;
  return j;
}

OnlineData online_from_json(const json& j) {
  OnlineData m;
  m.problem = j.at("problem").get<std::string>();
  m.box.range = j.at("box").get<std::vector<std::array<double, 2>>>();
  m.theta_a = thetas_from_json(j.at("theta_a"));
  m.theta_f = thetas_from_json(j.at("theta_f"));
  m.gram_theta = thetas_from_json(j.at("gram_theta"));
  m.f_gram = mat_from_json(j.at("f_gram"));
  m.n_primal = j.at("n_primal").get<int>();
  m.n_err = j.at("n_err").get<int>();
  m.a_xx = mats_from_json(j.at("a_xx"));
  m.a_ee = mats_from_json(j.at("a_ee"));
  m.a_ex = mats_from_json(j.at("a_ex"));
  m.f_x = vecs_from_json(j.at("f_x"));
  m.f_e = vecs_from_json(j.at("f_e"));
  m.scm = scm_from_json(j.at("scm"));
  m.delta_final = j.at("delta_final").get<double>();
  m.certified = j.at("certified").get<bool>();
  return m;
}

json log_to_json(const std::vector<TrainLogRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back(json{{"iter", r.iter},
                     {"basis_size", r.basis_size},
                     {"chosen", r.chosen},
                     {"max_estimator", num_to_json(r.max_estimator)},
                     {"delta", r.delta},
                     {"event", r.event}});
  return a;
}

std::vector<TrainLogRow> log_from_json(const json& j) {
  std::vector<TrainLogRow> rows;
  for (const auto& e : j) {
    TrainLogRow r;
    r.iter = e.at("iter").get<int>();
    r.basis_size = e.at("basis_size").get<int>();
    r.chosen = e.at("chosen").get<ParamVec>();
    r.max_estimator = num_from_json(e.at("max_estimator"));
    r.delta = e.at("delta").get<double>();
    r.event = e.at("event").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

json basis_to_json(const Mat& b) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < b.cols(); ++c) cols.push_back(vec_to_json(b.col(c)));
  return cols;
}

Mat basis_from_json(const json& j) {
  const Eigen::Index nc = static_cast<Eigen::Index>(j.size());
  if (nc == 0) return Mat(0, 0);
  Mat b(static_cast<Eigen::Index>(j.front().size()), nc);
  Eigen::Index c = 0;
  for (const auto& col : j) b.col(c++) = vec_from_json(col);
  return b;
}

json check_root(json j) {
  if (!j.is_object() || j.value("format", std::string()) != kFormat)
    throw std::runtime_error("model file: missing or unsupported format tag");
  return j;
}

}  // namespace

void save_model(const RbModel& m, const std::string& path) {
  json j;
  j["format"] = kFormat;
  j["online"] = online_to_json(m.online);
  json off;
  off["mesh_n"] = m.mesh_n;
  off["z_depth"] = m.z_depth;
  off["train_seed"] = m.train_seed;
  off["train_count"] = m.train_count;
  off["delta0"] = m.delta0;
  off["n_max"] = m.n_max;
  off["scm_eps"] = m.scm_eps;
  off["offline_seconds"] = m.offline_seconds;
  off["selected"] = m.selected;
  off["log"] = log_to_json(m.log);
  j["offline"] = std::move(off);
  j["basis_x"] = basis_to_json(m.basis_x);
  j["basis_z"] = basis_to_json(m.basis_z);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

RbModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j = check_root(json::parse(in));

  RbModel m;
  m.online = online_from_json(j.at("online"));
  const json& off = j.at("offline");
  m.mesh_n = off.at("mesh_n").get<int>();
  m.z_depth = off.at("z_depth").get<int>();
  m.train_seed = off.at("train_seed").get<std::uint64_t>();
  m.train_count = off.at("train_count").get<int>();
  m.delta0 = off.at("delta0").get<double>();
  m.n_max = off.at("n_max").get<int>();
  m.scm_eps = off.at("scm_eps").get<double>();
  m.offline_seconds = off.value("offline_seconds", 0.0);
  m.selected = off.at("selected").get<std::vector<ParamVec>>();
  m.log = log_from_json(off.at("log"));
  m.basis_x = basis_from_json(j.at("basis_x"));
  m.basis_z = basis_from_json(j.at("basis_z"));
  return m;
}

OnlineData load_online(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  auto skip_bases = [](int, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key) {
      std::string k = parsed.get<std::string>();
      if (k == "basis_x" || k == "basis_z") return false;
    }
    return true;
  };
  json j = check_root(json::parse(in, skip_bases));
  return online_from_json(j.at("online"));
}

}  // namespace lsrb
