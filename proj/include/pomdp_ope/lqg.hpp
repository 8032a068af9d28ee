#pragma once

#include <string>

#include "pomdp_ope/common.hpp"

namespace pomdp_ope {

/**
 * Linear-quadratic-Gaussian system:
 *   s' = A s + B a + eps1,  o = C s + eps2,  r = -s'Qs - a'Ra
 * with eps1 ~ N(0, noise_cov_state), eps2 ~ N(0, noise_cov_obs).
 */
struct LQGModel {
  Mat a_mat;  // state dynamics, square
  Mat b_mat;  // control
  Mat c_mat;  // observation
  Mat q_cost;
  Mat r_cost;
  Mat noise_cov_state;
  Mat noise_cov_obs;
  double gamma = 0.9;

  int state_dim() const { return static_cast<int>(a_mat.rows()); }
  int action_dim() const { return static_cast<int>(b_mat.cols()); }
  int obs_dim() const { return static_cast<int>(c_mat.rows()); }

  void validate() const;

  std::string to_json_string(int indent = 2) const;
  static LQGModel from_json_string(const std::string& text);
  static LQGModel load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

}  // namespace pomdp_ope
