#include "pomdp_ope/tabular_pomdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pomdp_ope {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_rows_stochastic(const Mat& m, const char* name) {
  for (int r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < m.cols(); ++c) {
      if (m(r, c) < 0.0)
        throw ConfigError(std::string(name) + ": negative probability in row " +
                          std::to_string(r));
      sum += m(r, c);
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw ConfigError(std::string(name) + ": row " + std::to_string(r) +
                        " sums to " + std::to_string(sum));
  }
}

}  // namespace

void TabularPOMDP::validate() const {
  if (n_states < 1 || n_obs < 1 || n_actions < 1)
    throw ConfigError("TabularPOMDP: dimensions must be positive");
  if (transition.rows() != n_states * n_actions || transition.cols() != n_states)
    throw ConfigError("TabularPOMDP: transition shape mismatch");
  if (emission.rows() != n_states || emission.cols() != n_obs)
    throw ConfigError("TabularPOMDP: emission shape mismatch");
  if (reward.rows() != n_states || reward.cols() != n_actions)
    throw ConfigError("TabularPOMDP: reward shape mismatch");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("TabularPOMDP: gamma must lie in [0, 1)");
  if (!reward.allFinite()) throw ConfigError("TabularPOMDP: non-finite reward");
  if (initial_state_dist.size() != n_states)
    throw ConfigError("TabularPOMDP: initial_state_dist size mismatch");
  check_rows_stochastic(transition, "transition");
  check_rows_stochastic(emission, "emission");
  check_rows_stochastic(initial_state_dist.transpose(), "initial_state_dist");
}

std::string TabularPOMDP::to_json_string(int indent) const {
  nlohmann::json j;
  j["n_states"] = n_states;
  j["n_obs"] = n_obs;
  j["n_actions"] = n_actions;
  j["gamma"] = gamma;
  // transition[s][a][s'], emission[s][o], reward[s][a]; row-major dense.
  auto t = nlohmann::json::array();
  for (int s = 0; s < n_states; ++s) {
    auto per_a = nlohmann::json::array();
    for (int a = 0; a < n_actions; ++a) {
      auto row = nlohmann::json::array();
      for (int s2 = 0; s2 < n_states; ++s2) row.push_back(trans(s, a, s2));
      per_a.push_back(row);
    }
    t.push_back(per_a);
  }
  j["transition"] = t;
  auto e = nlohmann::json::array();
  for (int s = 0; s < n_states; ++s) {
    auto row = nlohmann::json::array();
    for (int o = 0; o < n_obs; ++o) row.push_back(emit(s, o));
    e.push_back(row);
  }
  j["emission"] = e;
  auto r = nlohmann::json::array();
  for (int s = 0; s < n_states; ++s) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < n_actions; ++a) row.push_back(rew(s, a));
    r.push_back(row);
  }
  j["reward"] = r;
  auto init = nlohmann::json::array();
  for (int s = 0; s < n_states; ++s) init.push_back(initial_state_dist(s));
  j["initial_state_dist"] = init;
  return j.dump(indent);
}

TabularPOMDP TabularPOMDP::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("model JSON parse error: ") + e.what());
  }
  TabularPOMDP m;
  try {
    m.n_states = j.at("n_states").get<int>();
    m.n_obs = j.at("n_obs").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.gamma = j.at("gamma").get<double>();
    m.transition = Mat(m.n_states * m.n_actions, m.n_states);
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a)
        for (int s2 = 0; s2 < m.n_states; ++s2)
          m.transition(s * m.n_actions + a, s2) =
              j.at("transition").at(s).at(a).at(s2).get<double>();
    m.emission = Mat(m.n_states, m.n_obs);
    for (int s = 0; s < m.n_states; ++s)
      for (int o = 0; o < m.n_obs; ++o)
        m.emission(s, o) = j.at("emission").at(s).at(o).get<double>();
    m.reward = Mat(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a)
        m.reward(s, a) = j.at("reward").at(s).at(a).get<double>();
    m.initial_state_dist = Vec(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
      m.initial_state_dist(s) = j.at("initial_state_dist").at(s).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON structure error: ") + e.what());
  }
  m.validate();
  return m;
}

TabularPOMDP TabularPOMDP::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void TabularPOMDP::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write model file: " + path);
  out << to_json_string() << "\n";
}

}  // namespace pomdp_ope
