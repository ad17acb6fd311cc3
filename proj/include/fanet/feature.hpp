#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "fanet/errors.hpp"
#include "fanet/geometry.hpp"
#include "fanet/tubelet.hpp"

namespace fanet {

/// Dense H x W x C feature grid with an input-pixel stride. Data is row-major
/// with channels innermost.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  double stride = 1.0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, double stride_px, double fill = 0.0)
      : height(h), width(w), channels(c), stride(stride_px) {
    if (h < 1 || w < 1 || c < 1 || !(stride_px > 0.0)) {
      throw PreconditionError("FeatureMap: non-positive dimensions");
    }
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
  }

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  void check_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) {
        throw PreconditionError("FeatureMap: non-finite value");
      }
    }
  }
};

/// Fixed-size pooled feature grid (h x w x C, channels innermost).
struct RoIFeature {
  int h = 0;
  int w = 0;
  int channels = 0;
  std::vector<double> data;

  RoIFeature() = default;
  RoIFeature(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), channels(c_) {
    if (h_ < 1 || w_ < 1 || c_ < 1) {
      throw PreconditionError("RoIFeature: non-positive dimensions");
    }
    data.assign(static_cast<std::size_t>(h_) * w_ * c_, fill);
  }

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * w + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * w + col) * channels + ch];
  }
};

namespace detail {

/// Bilinear read at feature-grid coordinates (x, y), where cell (r, c) holds
/// its value at center (c + 0.5, r + 0.5). Out-of-bounds neighbors
/// contribute 0.
inline double bilinear_sample(const FeatureMap& fm, double x, double y,
                              int ch) {
  const double u = x - 0.5;
  const double v = y - 0.5;
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  const double du = u - c0;
  const double dv = v - r0;
  double acc = 0.0;
  for (int dr = 0; dr <= 1; ++dr) {
    const int r = r0 + dr;
    if (r < 0 || r >= fm.height) continue;
    const double wr = dr == 0 ? 1.0 - dv : dv;
    for (int dc = 0; dc <= 1; ++dc) {
      const int c = c0 + dc;
      if (c < 0 || c >= fm.width) continue;
      const double wc = dc == 0 ? 1.0 - du : du;
      acc += wr * wc * fm.at(r, c, ch);
    }
  }
  return acc;
}

}  // namespace detail

/// RoI Align: pools the box region (input-pixel coordinates) into an
/// out_h x out_w x C grid. Each bin averages samples_per_bin^2 regularly
/// placed bilinear samples.
inline RoIFeature roi_align(const FeatureMap& fm, const BBox& box, int out_h,
                            int out_w, int samples_per_bin) {
  check_box(box);
  if (box.area() <= 0.0) {
    throw PreconditionError("roi_align: degenerate zero-area box");
  }
  if (out_h < 1 || out_w < 1 || samples_per_bin < 1) {
    throw PreconditionError("roi_align: non-positive output spec");
  }

  const double fx1 = box.x1 / fm.stride;
  const double fy1 = box.y1 / fm.stride;
  const double bin_w = (box.x2 - box.x1) / fm.stride / out_w;
  const double bin_h = (box.y2 - box.y1) / fm.stride / out_h;
  const int n = samples_per_bin;
  const double inv_count = 1.0 / (n * n);

  RoIFeature out(out_h, out_w, fm.channels);
  for (int by = 0; by < out_h; ++by) {
    for (int bx = 0; bx < out_w; ++bx) {
      for (int ch = 0; ch < fm.channels; ++ch) {
        double acc = 0.0;
        for (int sy = 0; sy < n; ++sy) {
          const double y = fy1 + (by + (sy + 0.5) / n) * bin_h;
          for (int sx = 0; sx < n; ++sx) {
            const double x = fx1 + (bx + (sx + 0.5) / n) * bin_w;
            acc += detail::bilinear_sample(fm, x, y, ch);
          }
        }
        out.at(by, bx, ch) = acc * inv_count;
      }
    }
  }
  return out;
}

/// Interleaved channel concatenation of N same-shape maps in temporal order
/// (oldest first): output channel N*k + t holds channel k of frame t, so the
/// N temporal copies of each source channel sit consecutively.
inline RoIFeature concat_interleave(const std::vector<RoIFeature>& maps) {
  if (maps.empty()) {
    throw PreconditionError("concat_interleave: empty input");
  }
  const int h = maps.front().h;
  const int w = maps.front().w;
  const int c = maps.front().channels;
  for (const auto& m : maps) {
    if (m.h != h || m.w != w || m.channels != c) {
      throw PreconditionError("concat_interleave: shape mismatch");
    }
  }
  const int n = static_cast<int>(maps.size());
  RoIFeature out(h, w, n * c);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      for (int k = 0; k < c; ++k) {
        for (int t = 0; t < n; ++t) {
          out.at(row, col, n * k + t) = maps[t].at(row, col, k);
        }
      }
    }
  }
  return out;
}

/// Temporal pooling: elementwise maximum over the N interleaved temporal
/// copies of each channel. Output is h x w x C for every N.
inline RoIFeature temporal_pool(const RoIFeature& concatenated, int n_frames) {
  if (n_frames < 1 || concatenated.channels % n_frames != 0) {
    throw PreconditionError(
        "temporal_pool: channel count not divisible by n_frames");
  }
  const int c = concatenated.channels / n_frames;
  RoIFeature out(concatenated.h, concatenated.w, c);
  for (int row = 0; row < concatenated.h; ++row) {
    for (int col = 0; col < concatenated.w; ++col) {
      for (int k = 0; k < c; ++k) {
        double m = concatenated.at(row, col, n_frames * k);
        for (int t = 1; t < n_frames; ++t) {
          m = std::max(m, concatenated.at(row, col, n_frames * k + t));
        }
        out.at(row, col, k) = m;
      }
    }
  }
  return out;
}

/// Feature maps indexed by frame, then by pyramid level.
using FramePyramid = std::map<int, std::map<int, FeatureMap>>;

struct AggregationConfig {
  int out_h = 7;
  int out_w = 7;
  int samples_per_bin = 2;
  int level_k0 = 4;
  double canonical_size = 224.0;
  int min_level = 2;
  int max_level = 5;
};

/// Full short-term aggregation path for one tubelet: per-box pyramid level
/// assignment, per-frame RoI Align, interleaved concatenation, temporal
/// pooling.
inline RoIFeature aggregate_tubelet_features(const FramePyramid& pyramids,
                                             const Tubelet& tubelet,
                                             const AggregationConfig& cfg) {
  tubelet.check();
  std::vector<RoIFeature> per_frame;
  per_frame.reserve(tubelet.length());
  for (std::size_t k = 0; k < tubelet.length(); ++k) {
    const int frame = tubelet.frame_at(k);
    const int level =
        assign_pyramid_level(tubelet.boxes[k], cfg.level_k0,
                             cfg.canonical_size, cfg.min_level, cfg.max_level);
    const auto frame_it = pyramids.find(frame);
    if (frame_it == pyramids.end()) {
      throw ResourceError("no feature maps for frame " +
                          std::to_string(frame));
    }
    const auto level_it = frame_it->second.find(level);
    if (level_it == frame_it->second.end()) {
      throw ResourceError("no feature map for frame " + std::to_string(frame) +
                          " level " + std::to_string(level));
    }
    per_frame.push_back(roi_align(level_it->second, tubelet.boxes[k],
                                  cfg.out_h, cfg.out_w, cfg.samples_per_bin));
  }
  return temporal_pool(concat_interleave(per_frame),
                       static_cast<int>(per_frame.size()));
}

}  // namespace fanet
