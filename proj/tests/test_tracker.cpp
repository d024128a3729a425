#include <random>

#include <catch_amalgamated.hpp>

#include "evtrack/tracker.hpp"

using namespace evtrack;

namespace {

/// Blob of counts pasted at (ox, oy) over a sparse noisy background.
SpikeCountFrame blob_frame(Geometry g, int ox, int oy, std::uint64_t noise_seed) {
  SpikeCountFrame f = make_frame(g);
  for (int dy = 0; dy < 10; ++dy) {
    for (int dx = 0; dx < 10; ++dx) {
      // asymmetric pattern so the appearance is localizable
      f.at(ox + dx, oy + dy) = std::uint32_t(1 + (dx * 3 + dy * 7) % 5);
    }
  }
  std::mt19937_64 rng(noise_seed);
  std::uniform_int_distribution<int> px(0, g.width - 1), py(0, g.height - 1);
  for (int i = 0; i < 60; ++i) {
    const int x = px(rng), y = py(rng);
    if (x >= ox - 2 && x < ox + 12 && y >= oy - 2 && y < oy + 12) continue;
    f.at(x, y) += 1;
  }
  return f;
}

std::size_t brute_disk_count(int radius, bool inclusive) {
  std::size_t count = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (inclusive ? d2 <= radius * radius : d2 < radius * radius) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("positive lattice disk for alpha 4 has 45 shifts") {
  CHECK(brute_disk_count(4, false) == 45);
  CHECK(detail::lattice_disk(4).size() == 45);
}

TEST_CASE("candidate lattice disk for gamma 20 has 1257 shifts") {
  CHECK(brute_disk_count(20, true) == 1257);
  CHECK(detail::lattice_disk(20, true).size() == 1257);
}

TEST_CASE("candidate set always contains the zero shift") {
  for (int radius : {1, 2, 5, 20}) {
    bool has_zero = false;
    for (const auto& s : detail::lattice_disk(radius)) {
      if (s.dx == 0 && s.dy == 0) has_zero = true;
    }
    CHECK(has_zero);
  }
}

TEST_CASE("tracking is deterministic, matrix fixed for the whole track") {
  const Geometry g{128, 128};
  std::vector<SpikeCountFrame> frames;
  for (int k = 0; k < 5; ++k) {
    frames.push_back(blob_frame(g, 40 + k, 40, 100 + std::uint64_t(k)));
    frames.back().bin_index = std::uint64_t(k);
    frames.back().t_start = std::uint64_t(k) * 10000;
  }
  const BoundingBox bbox0{38, 38, 14, 14};
  TrackerConfig cfg;
  cfg.seed = 5;

  Tracker a(frames[0], bbox0, cfg);
  Tracker b(frames[0], bbox0, cfg);
  const std::string matrix_at_init = a.matrix().to_text();
  for (int k = 1; k < 5; ++k) {
    const auto ra = a.step(frames[std::size_t(k)]);
    const auto rb = b.step(frames[std::size_t(k)]);
    CHECK(ra.bbox == rb.bbox);
    CHECK(ra.score == rb.score);
  }
  CHECK(a.matrix().to_text() == matrix_at_init);
}

TEST_CASE("a frame identical to the init frame keeps the box in place") {
  const Geometry g{128, 128};
  const SpikeCountFrame f = blob_frame(g, 50, 60, 77);
  const BoundingBox bbox0{48, 58, 14, 14};
  TrackerConfig cfg;
  Tracker t(f, bbox0, cfg);
  const auto rec = t.step(f);
  const double dx = rec.bbox.x - bbox0.x;
  const double dy = rec.bbox.y - bbox0.y;
  CHECK(dx * dx + dy * dy < double(cfg.positive_radius * cfg.positive_radius));
}

TEST_CASE("a clean (+3, 0) object shift is recovered exactly") {
  const Geometry g{128, 128};
  const SpikeCountFrame f0 = blob_frame(g, 40, 40, 1);
  const SpikeCountFrame f1 = blob_frame(g, 43, 40, 1);
  const BoundingBox bbox0{39, 39, 12, 12};
  Tracker t(f0, bbox0, {});
  const auto rec = t.step(f1);
  CHECK(rec.bbox.x == bbox0.x + 3);
  CHECK(rec.bbox.y == bbox0.y);
}

TEST_CASE("per-bin displacement is bounded by the search radius") {
  const Geometry g{128, 128};
  std::mt19937_64 rng(202);
  const SpikeCountFrame f0 = blob_frame(g, 30, 30, 2);
  const BoundingBox bbox0{28, 28, 14, 14};
  TrackerConfig cfg;
  Tracker t(f0, bbox0, cfg);
  BoundingBox prev = bbox0;
  for (int k = 0; k < 8; ++k) {
    SpikeCountFrame noise = make_frame(g);
    std::uniform_int_distribution<int> p(0, 127);
    for (int i = 0; i < 300; ++i) noise.at(p(rng), p(rng)) += 1;
    const auto rec = t.step(noise);
    const int ddx = rec.bbox.x - prev.x;
    const int ddy = rec.bbox.y - prev.y;
    CHECK(ddx * ddx + ddy * ddy <= cfg.search_radius * cfg.search_radius);
    CHECK(rec.bbox.w == bbox0.w);
    CHECK(rec.bbox.h == bbox0.h);
    prev = rec.bbox;
  }
}

TEST_CASE("single frame track yields one record at the initial box") {
  const Geometry g{128, 128};
  const auto records = track({blob_frame(g, 60, 60, 3)}, {58, 58, 14, 14}, {});
  REQUIRE(records.size() == 1);
  CHECK(records[0].bbox == BoundingBox{58, 58, 14, 14});
  CHECK(records[0].bin_index == 0);
}

TEST_CASE("corner boxes clip positive samples but still initialize") {
  const Geometry g{128, 128};
  SpikeCountFrame f = blob_frame(g, 0, 0, 9);
  Tracker t(f, {0, 0, 12, 12}, {});
  CHECK(t.bbox() == BoundingBox{0, 0, 12, 12});
}

TEST_CASE("no fitting negative window is an initialization error") {
  const Geometry g{12, 12};
  SpikeCountFrame f = make_frame(g);
  f.at(5, 5) = 3;
  TrackerConfig cfg;  // annulus (8, 30] cannot fit in a 12x12 frame around this box
  CHECK_THROWS_AS(Tracker(f, {2, 2, 8, 8}, cfg), std::runtime_error);
}

TEST_CASE("invalid config combinations are rejected") {
  const Geometry g{128, 128};
  const SpikeCountFrame f = blob_frame(g, 40, 40, 4);
  TrackerConfig bad;
  bad.positive_radius = 10;  // alpha must stay below the annulus inner radius
  CHECK_THROWS_AS(Tracker(f, {38, 38, 14, 14}, bad), std::invalid_argument);
}
