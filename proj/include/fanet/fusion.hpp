#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fanet/errors.hpp"

namespace fanet {

/// Per-class score vector, every entry in [0, 1].
using ScoreVector = std::vector<double>;

namespace detail {

inline void check_scores(const ScoreVector& v, const char* who) {
  for (double s : v) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw PreconditionError(std::string(who) + ": score outside [0,1]");
    }
  }
}

}  // namespace detail

/// Double-head fusion: p = p_tmp + p_spt * (1 - p_tmp), elementwise.
/// Probabilistic OR, so the output stays in [0,1] and never drops below
/// either input.
inline ScoreVector fuse_scores(const ScoreVector& p_spt,
                               const ScoreVector& p_tmp) {
  if (p_spt.size() != p_tmp.size()) {
    throw PreconditionError("fuse_scores: length mismatch");
  }
  detail::check_scores(p_spt, "fuse_scores");
  detail::check_scores(p_tmp, "fuse_scores");
  ScoreVector out(p_spt.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = p_tmp[i] + p_spt[i] * (1.0 - p_tmp[i]);
  }
  return out;
}

/// Test-time cascade combination: elementwise mean of the per-stage scores.
inline ScoreVector cascade_average(const std::vector<ScoreVector>& stages) {
  if (stages.empty()) {
    throw PreconditionError("cascade_average: empty stage list");
  }
  const std::size_t len = stages.front().size();
  for (const auto& s : stages) {
    if (s.size() != len) {
      throw PreconditionError("cascade_average: length mismatch");
    }
  }
  ScoreVector out(len, 0.0);
  for (const auto& s : stages) {
    for (std::size_t i = 0; i < len; ++i) out[i] += s[i];
  }
  for (double& v : out) v /= static_cast<double>(stages.size());
  return out;
}

/// Combines per-stage spatial scores with the temporal head score. The order
/// flag picks between averaging the cascade stages first and fusing the
/// result (default), or fusing each stage and averaging the fused vectors.
inline ScoreVector combine_head_scores(const std::vector<ScoreVector>& spatial_stages,
                                       const ScoreVector& temporal,
                                       bool fuse_after_cascade = true) {
  if (fuse_after_cascade) {
    return fuse_scores(cascade_average(spatial_stages), temporal);
  }
  std::vector<ScoreVector> fused;
  fused.reserve(spatial_stages.size());
  for (const auto& stage : spatial_stages) {
    fused.push_back(fuse_scores(stage, temporal));
  }
  return cascade_average(fused);
}

}  // namespace fanet
