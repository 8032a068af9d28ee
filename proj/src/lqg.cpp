#include "pomdp_ope/lqg.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include <Eigen/Eigenvalues>

namespace pomdp_ope {

namespace {

constexpr double kPsdTol = 1e-10;

void check_psd(const Mat& m, const char* name) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(name) + " must be square");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kPsdTol * scale)
    throw ConfigError(std::string(name) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.eigenvalues().minCoeff() < -kPsdTol * scale)
    throw ConfigError(std::string(name) + " must be positive semi-definite");
}

Mat json_matrix(const nlohmann::json& j) {
  int rows = static_cast<int>(j.size());
  int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

nlohmann::json matrix_json(const Mat& m) {
  auto out = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

}  // namespace

void LQGModel::validate() const {
  int ds = state_dim(), da = action_dim(), dy = obs_dim();
  if (ds < 1 || da < 1 || dy < 1) throw ConfigError("LQGModel: empty dimension");
  if (a_mat.cols() != ds) throw ConfigError("LQGModel: A must be square");
  if (b_mat.rows() != ds) throw ConfigError("LQGModel: B row count must match A");
  if (c_mat.cols() != ds) throw ConfigError("LQGModel: C column count must match A");
  if (q_cost.rows() != ds || q_cost.cols() != ds)
    throw ConfigError("LQGModel: Q must be state_dim x state_dim");
  if (r_cost.rows() != da || r_cost.cols() != da)
    throw ConfigError("LQGModel: R must be action_dim x action_dim");
  if (noise_cov_state.rows() != ds) throw ConfigError("LQGModel: state noise shape");
  if (noise_cov_obs.rows() != dy) throw ConfigError("LQGModel: obs noise shape");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("LQGModel: gamma in [0,1)");
  check_psd(q_cost, "Q");
  check_psd(r_cost, "R");
  check_psd(noise_cov_state, "noise_cov_state");
  check_psd(noise_cov_obs, "noise_cov_obs");
}

std::string LQGModel::to_json_string(int indent) const {
  nlohmann::json j;
  j["A"] = matrix_json(a_mat);
  j["B"] = matrix_json(b_mat);
  j["C"] = matrix_json(c_mat);
  j["Q"] = matrix_json(q_cost);
  j["R"] = matrix_json(r_cost);
  j["noise_cov_state"] = matrix_json(noise_cov_state);
  j["noise_cov_obs"] = matrix_json(noise_cov_obs);
  j["gamma"] = gamma;
  return j.dump(indent);
}

LQGModel LQGModel::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("LQG JSON parse error: ") + e.what());
  }
  LQGModel m;
  try {
    m.a_mat = json_matrix(j.at("A"));
    m.b_mat = json_matrix(j.at("B"));
    m.c_mat = json_matrix(j.at("C"));
    m.q_cost = json_matrix(j.at("Q"));
    m.r_cost = json_matrix(j.at("R"));
    m.noise_cov_state = json_matrix(j.at("noise_cov_state"));
    m.noise_cov_obs = json_matrix(j.at("noise_cov_obs"));
    m.gamma = j.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("LQG JSON structure error: ") + e.what());
  }
  m.validate();
  return m;
}

LQGModel LQGModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open LQG model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void LQGModel::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write LQG model file: " + path);
  out << to_json_string() << "\n";
}

}  // namespace pomdp_ope
