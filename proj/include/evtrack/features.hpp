#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "evtrack/events.hpp"

namespace evtrack {

/// Cumulative-sum grid of size (W+1)x(H+1); cell (i, j) holds the sum of
/// counts over all pixels with x < i and y < j.
struct IntegralImage {
  int width = 0;   // underlying frame width
  int height = 0;  // underlying frame height
  std::vector<std::uint64_t> cum;  // (width + 1) * (height + 1), row-major

  std::uint64_t cell(int i, int j) const {
    return cum[std::size_t(j) * (width + 1) + i];
  }
  /// Sum of counts over the half-open box [x0, x1) x [y0, y1).
  std::uint64_t rect_sum(int x0, int y0, int x1, int y1) const {
    return cell(x1, y1) - cell(x0, y1) - cell(x1, y0) + cell(x0, y0);
  }
};

inline IntegralImage build_integral(const SpikeCountFrame& frame) {
  IntegralImage ii;
  ii.width = frame.geometry.width;
  ii.height = frame.geometry.height;
  ii.cum.assign(std::size_t(ii.width + 1) * (ii.height + 1), 0);
  for (int y = 0; y < ii.height; ++y) {
    std::uint64_t row = 0;
    for (int x = 0; x < ii.width; ++x) {
      row += frame.at(x, y);
      ii.cum[std::size_t(y + 1) * (ii.width + 1) + (x + 1)] =
          ii.cum[std::size_t(y) * (ii.width + 1) + (x + 1)] + row;
    }
  }
  return ii;
}

/// A window-relative axis-aligned box, half-open in both axes.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  bool operator==(const Rect&) const = default;
};

/// Bijection between flat indices in [0, (wh)^2) and rectangle filters over a
/// w x h window. Every (scale, position) pair in [1,w]x[1,h]x[0,w)x[0,h) gets
/// one index; filters overhanging the window edge are clipped to it. Scales
/// are enumerated row-major by (ry, rx), positions row-major by (py, px).
struct FeatureIndexMap {
  int win_w = 0;
  int win_h = 0;

  struct Filter {
    int rx = 1, ry = 1;  // nominal filter size
    int px = 0, py = 0;  // top-left position in the window
  };

  std::uint64_t size() const {
    const std::uint64_t wh = std::uint64_t(win_w) * win_h;
    return wh * wh;
  }

  std::uint64_t encode(const Filter& f) const {
    const std::uint64_t wh = std::uint64_t(win_w) * win_h;
    const std::uint64_t scale_idx = std::uint64_t(f.ry - 1) * win_w + (f.rx - 1);
    const std::uint64_t pos_idx = std::uint64_t(f.py) * win_w + f.px;
    return scale_idx * wh + pos_idx;
  }

  Filter decode(std::uint64_t flat) const {
    const std::uint64_t wh = std::uint64_t(win_w) * win_h;
    const std::uint64_t scale_idx = flat / wh;
    const std::uint64_t pos_idx = flat % wh;
    Filter f;
    f.ry = int(scale_idx / win_w) + 1;
    f.rx = int(scale_idx % win_w) + 1;
    f.py = int(pos_idx / win_w);
    f.px = int(pos_idx % win_w);
    return f;
  }

  /// The filter's support clipped to the window.
  Rect clipped_rect(const Filter& f) const {
    Rect r;
    r.x = f.px;
    r.y = f.py;
    r.w = std::min(f.rx, win_w - f.px);
    r.h = std::min(f.ry, win_h - f.py);
    return r;
  }
};

/// One nonzero of the measurement matrix: the clipped rectangle it sums over
/// and the sign of its +-sqrt(s) weight.
struct MatrixEntry {
  Rect rect;
  std::uint64_t flat_index = 0;  // position in the implicit (wh)^2 space
  std::int8_t sign = 1;
};

/// n rows of (rectangle, weight) pairs drawn from the very sparse random
/// projection distribution with entry values {+sqrt(s), 0, -sqrt(s)} at
/// probabilities {1/2s, 1 - 1/s, 1/2s}, s = m/4. Fixed for the lifetime of a
/// track.
struct SparseMeasurementMatrix {
  int n = 0;
  int win_w = 0;
  int win_h = 0;
  std::uint64_t seed = 0;
  double sparsity = 0;          // s = m/4
  double weight_magnitude = 0;  // sqrt(s)
  std::vector<std::vector<MatrixEntry>> rows;

  std::uint64_t implicit_dim() const {
    const std::uint64_t wh = std::uint64_t(win_w) * win_h;
    return wh * wh;
  }

  /// Reproducibility dump: one row per line, "i: (rx,ry,px,py,+-1) ...".
  /// Rectangle coordinates are the clipped support; the +-sqrt(s) magnitude
  /// is implied by s.
  std::string to_text() const {
    std::string out = "n=" + std::to_string(n) + " w=" + std::to_string(win_w) +
                      " h=" + std::to_string(win_h) +
                      " seed=" + std::to_string(seed) + "\n";
    for (int i = 0; i < n; ++i) {
      out += std::to_string(i) + ":";
      for (const MatrixEntry& e : rows[i]) {
        out += " (" + std::to_string(e.rect.w) + "," + std::to_string(e.rect.h) +
               "," + std::to_string(e.rect.x) + "," + std::to_string(e.rect.y) +
               "," + (e.sign > 0 ? std::string("+1") : std::string("-1")) + ")";
      }
      out += "\n";
    }
    return out;
  }
};

/// Draws the matrix row by row: nonzero count K ~ Binomial(m, 1/s) (the
/// i.i.d. entry distribution aggregated), K distinct flat indices uniform,
/// signs fair. All-zero rows are redrawn.
inline SparseMeasurementMatrix sample_matrix(int n, int win_w, int win_h,
                                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (std::uint64_t(win_w) * win_h < 2)
    throw std::invalid_argument("window must have at least 2 pixels");
  SparseMeasurementMatrix mat;
  mat.n = n;
  mat.win_w = win_w;
  mat.win_h = win_h;
  mat.seed = seed;
  const std::uint64_t m = mat.implicit_dim();
  mat.sparsity = double(m) / 4.0;
  mat.weight_magnitude = std::sqrt(mat.sparsity);
  mat.rows.resize(n);

  std::mt19937_64 rng(seed);
  std::binomial_distribution<std::int64_t> nonzero_count(std::int64_t(m),
                                                         1.0 / mat.sparsity);
  std::uniform_int_distribution<std::uint64_t> index_dist(0, m - 1);
  std::uniform_int_distribution<int> sign_dist(0, 1);
  const FeatureIndexMap map{win_w, win_h};

  for (int i = 0; i < n; ++i) {
    std::int64_t k = 0;
    while ((k = nonzero_count(rng)) == 0) {
      // redraw: an all-zero row carries no information
    }
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(std::size_t(k) * 2);
    auto& row = mat.rows[i];
    row.reserve(std::size_t(k));
    while (std::int64_t(chosen.size()) < k) {
      const std::uint64_t flat = index_dist(rng);
      if (!chosen.insert(flat).second) continue;
      MatrixEntry entry;
      entry.rect = map.clipped_rect(map.decode(flat));
      entry.flat_index = flat;
      entry.sign = sign_dist(rng) ? std::int8_t(1) : std::int8_t(-1);
      row.push_back(entry);
    }
  }
  return mat;
}

using FeatureVector = std::vector<double>;

/// v = Mx evaluated sparsely: each row sums its rectangles (offset to the
/// window origin) from the integral image and scales by +-sqrt(s).
inline FeatureVector project(const SparseMeasurementMatrix& mat, int origin_x,
                             int origin_y, const IntegralImage& ii) {
  if (origin_x < 0 || origin_y < 0 || origin_x + mat.win_w > ii.width ||
      origin_y + mat.win_h > ii.height) {
    throw std::out_of_range("window placement outside the frame");
  }
  FeatureVector v(std::size_t(mat.n), 0.0);
  for (int i = 0; i < mat.n; ++i) {
    double acc = 0;
    for (const MatrixEntry& e : mat.rows[i]) {
      const int x0 = origin_x + e.rect.x;
      const int y0 = origin_y + e.rect.y;
      const double sum =
          double(ii.rect_sum(x0, y0, x0 + e.rect.w, y0 + e.rect.h));
      acc += e.sign > 0 ? sum : -sum;
    }
    v[std::size_t(i)] = acc * mat.weight_magnitude;
  }
  return v;
}

}  // namespace evtrack
