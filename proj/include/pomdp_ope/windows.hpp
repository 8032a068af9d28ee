#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pomdp_ope/common.hpp"

namespace pomdp_ope {

/// Maximum flat-index space size accepted for exact enumeration.
inline constexpr std::int64_t kEnumerationCapacity = 50'000'000;

/// Window lengths: policy memory M, history length M_H > M, future
/// length M_F >= 1.
struct WindowConfig {
  int m = 0;
  int m_h = 1;
  int m_f = 1;

  void validate() const {
    if (m < 0) throw ConfigError("WindowConfig: m must be >= 0");
    if (m_h <= m) throw ConfigError("WindowConfig: m_h must exceed m");
    if (m_f < 1) throw ConfigError("WindowConfig: m_f must be >= 1");
  }
};

using PairWindow = std::vector<std::pair<int, int>>;  // (obs, action), oldest first

/// Future window F = (O_{t:t+MF-1}, A_{t:t+MF-2}): obs has m_f entries,
/// acts has m_f - 1.
struct Future {
  std::vector<int> obs;
  std::vector<int> acts;

  bool operator==(const Future&) const = default;
};

inline std::int64_t checked_pow(std::int64_t base, int exp, const char* what) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > kEnumerationCapacity / base)
      throw CapacityError(std::string(what) + ": enumeration would need more than " +
                          std::to_string(kEnumerationCapacity) + " cells");
    r *= base;
  }
  return r;
}

/// Flat indexing for windows of (obs, action) pairs. The oldest pair is
/// the most significant digit; within a pair the observation precedes
/// the action. An empty window (len = 0) has the single index 0.
class PairWindowCodec {
 public:
  PairWindowCodec() = default;
  PairWindowCodec(int n_obs, int n_actions, int len)
      : n_obs_(n_obs), n_actions_(n_actions), len_(len) {
    size_ = checked_pow(static_cast<std::int64_t>(n_obs) * n_actions, len, "pair window");
  }

  std::int64_t size() const { return size_; }
  int length() const { return len_; }

  std::int64_t encode(const PairWindow& w) const {
    if (static_cast<int>(w.size()) != len_)
      throw ArgumentError("window length mismatch");
    std::int64_t idx = 0;
    for (const auto& [o, a] : w) {
      check(o, a);
      idx = (idx * n_obs_ + o) * n_actions_ + a;
    }
    return idx;
  }

  PairWindow decode(std::int64_t idx) const {
    PairWindow w(len_);
    for (int i = len_ - 1; i >= 0; --i) {
      int a = static_cast<int>(idx % n_actions_);
      idx /= n_actions_;
      int o = static_cast<int>(idx % n_obs_);
      idx /= n_obs_;
      w[i] = {o, a};
    }
    return w;
  }

  /// Drop the oldest pair, append (o, a).
  std::int64_t shift(std::int64_t idx, int o, int a) const {
    if (len_ == 0) return 0;
    check(o, a);
    std::int64_t pair_count = static_cast<std::int64_t>(n_obs_) * n_actions_;
    std::int64_t keep = size_ / pair_count;  // (OA)^(len-1)
    return (idx % keep) * pair_count + static_cast<std::int64_t>(o) * n_actions_ + a;
  }

  /// The last `suffix_len` pairs (the least significant digits).
  std::int64_t suffix(std::int64_t idx, int suffix_len) const {
    std::int64_t pair_count = static_cast<std::int64_t>(n_obs_) * n_actions_;
    std::int64_t div = 1;
    for (int i = 0; i < suffix_len; ++i) div *= pair_count;
    return idx % div;
  }

 private:
  void check(int o, int a) const {
    if (o < 0 || o >= n_obs_ || a < 0 || a >= n_actions_)
      throw ArgumentError("observation or action index out of range");
  }

  int n_obs_ = 1, n_actions_ = 1, len_ = 0;
  std::int64_t size_ = 1;
};

/// Flat indexing for future windows, chronological digit order
/// o_t, a_t, o_{t+1}, ..., o_{t+MF-1}; the first component is the most
/// significant digit.
class FutureCodec {
 public:
  FutureCodec() = default;
  FutureCodec(int n_obs, int n_actions, int m_f)
      : n_obs_(n_obs), n_actions_(n_actions), m_f_(m_f) {
    size_ = checked_pow(n_obs, m_f, "future window");
    std::int64_t av = checked_pow(n_actions, m_f - 1, "future window");
    if (av != 0 && size_ > kEnumerationCapacity / av)
      throw CapacityError("future window space too large");
    size_ *= av;
  }

  std::int64_t size() const { return size_; }

  std::int64_t encode(const Future& f) const {
    if (static_cast<int>(f.obs.size()) != m_f_ ||
        static_cast<int>(f.acts.size()) != m_f_ - 1)
      throw ArgumentError("future window shape mismatch");
    std::int64_t idx = 0;
    for (int k = 0; k < m_f_; ++k) {
      if (f.obs[k] < 0 || f.obs[k] >= n_obs_)
        throw ArgumentError("future observation out of range");
      idx = idx * n_obs_ + f.obs[k];
      if (k + 1 < m_f_) {
        if (f.acts[k] < 0 || f.acts[k] >= n_actions_)
          throw ArgumentError("future action out of range");
        idx = idx * n_actions_ + f.acts[k];
      }
    }
    return idx;
  }

  Future decode(std::int64_t idx) const {
    Future f;
    f.obs.assign(m_f_, 0);
    f.acts.assign(m_f_ - 1, 0);
    for (int k = m_f_ - 1; k >= 0; --k) {
      if (k + 1 < m_f_) {
        f.acts[k] = static_cast<int>(idx % n_actions_);
        idx /= n_actions_;
      }
      f.obs[k] = static_cast<int>(idx % n_obs_);
      idx /= n_obs_;
    }
    return f;
  }

 private:
  int n_obs_ = 1, n_actions_ = 1, m_f_ = 1;
  std::int64_t size_ = 1;
};

/// All index spaces derived from model dimensions and a WindowConfig.
struct WindowSpaces {
  WindowConfig config;
  int n_states = 0;
  PairWindowCodec z;  // memory window, length M
  PairWindowCodec h;  // history window, length M_H
  FutureCodec f;      // future window

  WindowSpaces() = default;
  WindowSpaces(int n_states_, int n_obs, int n_actions, const WindowConfig& cfg)
      : config(cfg), n_states(n_states_) {
    cfg.validate();
    z = PairWindowCodec(n_obs, n_actions, cfg.m);
    h = PairWindowCodec(n_obs, n_actions, cfg.m_h);
    f = FutureCodec(n_obs, n_actions, cfg.m_f);
    if (z.size() > kEnumerationCapacity / std::max<std::int64_t>(f.size(), 1))
      throw CapacityError("joint (z, f) space too large");
  }

  std::int64_t fbar_size() const { return z.size() * f.size(); }
  std::int64_t sbar_size() const { return z.size() * n_states; }

  std::int64_t fbar_index(std::int64_t z_idx, std::int64_t f_idx) const {
    return z_idx * f.size() + f_idx;
  }
  std::int64_t sbar_index(std::int64_t z_idx, int s) const {
    return z_idx * n_states + s;
  }
  /// Memory window of a history index (its last M pairs).
  std::int64_t z_of_h(std::int64_t h_idx) const { return h.suffix(h_idx, config.m); }
};

}  // namespace pomdp_ope
