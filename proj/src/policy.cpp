#include "pomdp_ope/policy.hpp"

#include <cmath>

#include <json.hpp>

namespace pomdp_ope {

namespace {
constexpr double kRowSumTol = 1e-12;
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

MemoryPolicy MemoryPolicy::tabular(int memory, int n_obs, int n_actions, Mat table) {
  MemoryPolicy p;
  p.kind_ = Kind::Tabular;
  p.memory_ = memory;
  p.n_obs_ = n_obs;
  p.n_actions_ = n_actions;
  p.table_ = std::move(table);
  p.validate_for(n_obs, n_actions);
  return p;
}

MemoryPolicy MemoryPolicy::uniform(int memory, int n_obs, int n_actions) {
  PairWindowCodec z(n_obs, n_actions, memory);
  Mat table = Mat::Constant(z.size() * n_obs, n_actions, 1.0 / n_actions);
  return tabular(memory, n_obs, n_actions, std::move(table));
}

MemoryPolicy MemoryPolicy::linear_gain(int memory, Mat gain, double noise_std) {
  if (noise_std < 0.0) throw ConfigError("MemoryPolicy: noise_std must be >= 0");
  MemoryPolicy p;
  p.kind_ = Kind::LinearGain;
  p.memory_ = memory;
  p.gain_ = std::move(gain);
  p.noise_std_ = noise_std;
  return p;
}

Vec MemoryPolicy::act(const Vec& o, const Vec& z_flat, Rng* rng) const {
  if (kind_ != Kind::LinearGain)
    throw ConfigError("act(): policy is not linear-gain");
  Vec x(o.size() + z_flat.size());
  x << o, z_flat;
  if (gain_.cols() != x.size())
    throw ConfigError("linear-gain policy input dimension mismatch");
  Vec a = gain_ * x;
  if (noise_std_ > 0.0) {
    if (rng == nullptr) throw ArgumentError("stochastic policy requires an Rng");
    for (int i = 0; i < a.size(); ++i) a(i) += noise_std_ * rng->gaussian();
  }
  return a;
}

double MemoryPolicy::log_density(const Vec& action, const Vec& o, const Vec& z_flat) const {
  if (kind_ != Kind::LinearGain)
    throw ConfigError("log_density(): policy is not linear-gain");
  if (noise_std_ <= 0.0)
    throw ArgumentError("deterministic linear-gain policy has no density");
  Vec x(o.size() + z_flat.size());
  x << o, z_flat;
  Vec mean = gain_ * x;
  double d = static_cast<double>(action.size());
  double ss = (action - mean).squaredNorm() / (noise_std_ * noise_std_);
  return -0.5 * (ss + d * kLog2Pi) - d * std::log(noise_std_);
}

void MemoryPolicy::validate_for(int n_obs, int n_actions) const {
  if (memory_ < 0) throw ConfigError("MemoryPolicy: memory must be >= 0");
  if (kind_ == Kind::LinearGain) return;
  if (n_obs_ != n_obs || n_actions_ != n_actions)
    throw ConfigError("MemoryPolicy: observation/action space mismatch");
  PairWindowCodec z(n_obs, n_actions, memory_);
  if (table_.rows() != z.size() * n_obs || table_.cols() != n_actions)
    throw ConfigError("MemoryPolicy: table shape inconsistent with memory M");
  for (int r = 0; r < table_.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < table_.cols(); ++c) {
      if (table_(r, c) < 0.0) throw ConfigError("MemoryPolicy: negative probability");
      sum += table_(r, c);
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw ConfigError("MemoryPolicy: row " + std::to_string(r) + " sums to " +
                        std::to_string(sum));
  }
}

std::string MemoryPolicy::to_json_string(int indent) const {
  nlohmann::json j;
  j["memory"] = memory_;
  if (kind_ == Kind::Tabular) {
    j["kind"] = "tabular-table";
    j["n_obs"] = n_obs_;
    j["n_actions"] = n_actions_;
    auto rows = nlohmann::json::array();
    for (int r = 0; r < table_.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (int c = 0; c < table_.cols(); ++c) row.push_back(table_(r, c));
      rows.push_back(row);
    }
    j["table"] = rows;
  } else {
    j["kind"] = "linear-gain";
    j["noise_std"] = noise_std_;
    auto rows = nlohmann::json::array();
    for (int r = 0; r < gain_.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (int c = 0; c < gain_.cols(); ++c) row.push_back(gain_(r, c));
      rows.push_back(row);
    }
    j["gain"] = rows;
  }
  return j.dump(indent);
}

MemoryPolicy MemoryPolicy::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("policy JSON parse error: ") + e.what());
  }
  try {
    std::string kind = j.at("kind").get<std::string>();
    int memory = j.at("memory").get<int>();
    if (kind == "tabular-table") {
      int n_obs = j.at("n_obs").get<int>();
      int n_actions = j.at("n_actions").get<int>();
      const auto& rows = j.at("table");
      Mat table(rows.size(), n_actions);
      for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        for (int c = 0; c < n_actions; ++c) table(r, c) = rows.at(r).at(c).get<double>();
      return tabular(memory, n_obs, n_actions, std::move(table));
    }
    if (kind == "linear-gain") {
      const auto& rows = j.at("gain");
      int cols = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
      Mat gain(rows.size(), cols);
      for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        for (int c = 0; c < cols; ++c) gain(r, c) = rows.at(r).at(c).get<double>();
      return linear_gain(memory, std::move(gain), j.value("noise_std", 0.0));
    }
    throw FormatError("policy JSON: unknown kind " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("policy JSON structure error: ") + e.what());
  }
}

double importance_ratio(const MemoryPolicy& policy_e, const MemoryPolicy& policy_b,
                        std::int64_t z_idx, int o, int a) {
  double pe = policy_e.prob(z_idx, o, a);
  double pb = policy_b.prob(z_idx, o, a);
  if (pb <= 0.0) {
    if (pe <= 0.0) return 0.0;  // 0/0 := 0
    throw OverlapError("importance_ratio: pi_e > 0 where pi_b = 0 (z=" +
                       std::to_string(z_idx) + ", o=" + std::to_string(o) +
                       ", a=" + std::to_string(a) + ")");
  }
  return pe / pb;
}

}  // namespace pomdp_ope
