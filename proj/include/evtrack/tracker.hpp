#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "evtrack/binning.hpp"
#include "evtrack/classifier.hpp"
#include "evtrack/features.hpp"

namespace evtrack {

struct TrackerConfig {
  int search_radius = 20;    // gamma: candidate shift distance bound
  int positive_radius = 4;   // alpha: positive-sample shift bound
  int neg_inner = 8;         // negative annulus (inner, outer]
  int neg_outer = 30;
  int negative_count = 50;
  int n_features = 50;
  double lambda = 0.85;
  double sigma_floor = 1e-6;
  std::uint64_t seed = 0;

  void validate() const {
    if (positive_radius <= 0 || positive_radius >= neg_inner ||
        neg_inner > neg_outer)
      throw std::invalid_argument("need 0 < alpha < inner <= outer");
    if (search_radius < 1) throw std::invalid_argument("gamma must be >= 1");
    if (negative_count < 1) throw std::invalid_argument("negative_count must be >= 1");
    if (n_features < 1) throw std::invalid_argument("n_features must be >= 1");
  }
};

struct BoundingBox {
  int x = 0, y = 0;  // top-left pixel
  int w = 0, h = 0;
  bool operator==(const BoundingBox&) const = default;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool inside(const Geometry& g) const {
    return x >= 0 && y >= 0 && w >= 2 && h >= 2 && x + w <= g.width &&
           y + h <= g.height;
  }
};

struct TrajectoryRecord {
  std::uint64_t bin_index = 0;
  std::uint64_t t_start = 0;
  BoundingBox bbox;
  double score = 0;
  std::uint64_t events_in_bin = 0;
};

namespace detail {

struct Shift {
  int dx = 0, dy = 0;
};

/// Integer shifts within the radius, ascending row-major by (dy, dx); the
/// ordering doubles as the argmax tie-break. The positive-sample disk is
/// strict (alpha = 4 gives 45 shifts), the candidate disk inclusive
/// (gamma = 20 gives 1257).
inline std::vector<Shift> lattice_disk(int radius, bool inclusive = false) {
  std::vector<Shift> shifts;
  const int bound = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (inclusive ? d2 <= bound : d2 < bound) shifts.push_back({dx, dy});
    }
  }
  return shifts;
}

/// Integer shifts in the annulus inner < sqrt(dx^2+dy^2) <= outer.
inline std::vector<Shift> lattice_annulus(int inner, int outer) {
  std::vector<Shift> shifts;
  for (int dy = -outer; dy <= outer; ++dy) {
    for (int dx = -outer; dx <= outer; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > inner * inner && d2 <= outer * outer) shifts.push_back({dx, dy});
    }
  }
  return shifts;
}

}  // namespace detail

/// Per-bin compressive tracking loop: score every in-frame translation of the
/// current box within the search radius, move to the argmax, then refresh the
/// classifier from positive and annulus-negative windows around the new
/// position. The measurement matrix is fixed at construction for the whole
/// track.
class Tracker {
 public:
  Tracker(const SpikeCountFrame& frame0, const BoundingBox& bbox0,
          const TrackerConfig& config)
      : config_(config),
        bbox_(bbox0),
        geometry_(frame0.geometry),
        matrix_(sample_matrix(config.n_features, bbox0.w, bbox0.h, config.seed)),
        rng_(config.seed ^ 0x9E3779B97F4A7C15ull) {
    config_.validate();
    if (!bbox0.inside(geometry_))
      throw std::invalid_argument("initial bounding box outside the frame");
    const IntegralImage ii = build_integral(frame0);
    const auto positives = sample_positives(ii, bbox_);
    const auto negatives = sample_negatives(ii, bbox_);
    params_ = init_params(positives, negatives, config_.lambda,
                          config_.sigma_floor);
    init_score_ = score(params_, project(matrix_, bbox_.x, bbox_.y, ii));
  }

  /// Localize in the given frame and refresh the classifier; returns the
  /// record for this bin.
  TrajectoryRecord step(const SpikeCountFrame& frame) {
    if (!(frame.geometry == geometry_))
      throw std::invalid_argument("frame geometry changed mid-track");
    const IntegralImage ii = build_integral(frame);

    // step 1+2: dense candidate sweep, first maximum wins ties
    double best = -std::numeric_limits<double>::infinity();
    BoundingBox best_box = bbox_;
    for (const auto& s : detail::lattice_disk(config_.search_radius, true)) {
      BoundingBox cand = bbox_;
      cand.x += s.dx;
      cand.y += s.dy;
      if (!cand.inside(geometry_)) continue;
      const double h = score(params_, project(matrix_, cand.x, cand.y, ii));
      if (h > best) {
        best = h;
        best_box = cand;
      }
    }
    bbox_ = best_box;

    // step 3: refresh around the new location
    const auto positives = sample_positives(ii, bbox_);
    const auto negatives = sample_negatives(ii, bbox_);
    update(params_, positives, negatives);

    ++bin_count_;
    TrajectoryRecord rec;
    rec.bin_index = frame.bin_index;
    rec.t_start = frame.t_start;
    rec.bbox = bbox_;
    rec.score = best;
    rec.events_in_bin = frame_stats(frame).total_events;
    return rec;
  }

  const BoundingBox& bbox() const { return bbox_; }
  const SparseMeasurementMatrix& matrix() const { return matrix_; }
  const ClassifierParams& params() const { return params_; }
  double init_score() const { return init_score_; }
  std::uint64_t bin_count() const { return bin_count_; }

 private:
  std::vector<FeatureVector> sample_positives(const IntegralImage& ii,
                                              const BoundingBox& box) {
    std::vector<FeatureVector> out;
    for (const auto& s : detail::lattice_disk(config_.positive_radius)) {
      BoundingBox b = box;
      b.x += s.dx;
      b.y += s.dy;
      if (!b.inside(geometry_)) continue;
      out.push_back(project(matrix_, b.x, b.y, ii));
    }
    return out;  // never empty: the zero shift is always in-frame
  }

  std::vector<FeatureVector> sample_negatives(const IntegralImage& ii,
                                              const BoundingBox& box) {
    std::vector<detail::Shift> valid;
    for (const auto& s :
         detail::lattice_annulus(config_.neg_inner, config_.neg_outer)) {
      BoundingBox b = box;
      b.x += s.dx;
      b.y += s.dy;
      if (b.inside(geometry_)) valid.push_back(s);
    }
    if (valid.empty())
      throw std::runtime_error(
          "no negative window fits: bounding box too close to the border");
    std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
    std::vector<FeatureVector> out;
    out.reserve(std::size_t(config_.negative_count));
    for (int i = 0; i < config_.negative_count; ++i) {
      const auto& s = valid[pick(rng_)];
      out.push_back(project(matrix_, box.x + s.dx, box.y + s.dy, ii));
    }
    return out;
  }

  TrackerConfig config_;
  BoundingBox bbox_;
  Geometry geometry_;
  SparseMeasurementMatrix matrix_;
  ClassifierParams params_;
  std::mt19937_64 rng_;
  double init_score_ = 0;
  std::uint64_t bin_count_ = 0;
};

/// Runs a whole track: record 0 reports the initial box with the score of its
/// own window under the freshly initialized classifier, then one step per
/// subsequent frame.
inline std::vector<TrajectoryRecord> track(
    const std::vector<SpikeCountFrame>& frames, const BoundingBox& bbox0,
    const TrackerConfig& config) {
  if (frames.empty()) throw std::invalid_argument("need at least one frame");
  Tracker tracker(frames.front(), bbox0, config);
  std::vector<TrajectoryRecord> records;
  records.reserve(frames.size());
  TrajectoryRecord first;
  first.bin_index = frames.front().bin_index;
  first.t_start = frames.front().t_start;
  first.bbox = bbox0;
  first.score = tracker.init_score();
  first.events_in_bin = frame_stats(frames.front()).total_events;
  records.push_back(first);
  for (std::size_t k = 1; k < frames.size(); ++k) {
    records.push_back(tracker.step(frames[k]));
  }
  return records;
}

}  // namespace evtrack
