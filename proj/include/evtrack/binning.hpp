#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evtrack/events.hpp"

namespace evtrack {

enum class PolarityMode { both_summed, positive_only, negative_only };

struct BinningConfig {
  std::uint64_t bin_length_us = 10000;  // 10 ms bins, 100 bins per second
  PolarityMode polarity_mode = PolarityMode::both_summed;
};

inline bool polarity_selected(PolarityMode mode, Polarity p) {
  switch (mode) {
    case PolarityMode::both_summed: return true;
    case PolarityMode::positive_only: return p == Polarity::positive;
    case PolarityMode::negative_only: return p == Polarity::negative;
  }
  return false;
}

/// Folds an event stream into per-bin spike-count frames. An event at time t
/// falls into bin floor(t / bin_length); bins are emitted contiguously from 0
/// through the bin containing the last event. Streams generated over a known
/// duration keep their final timestamps strictly below the duration, so a
/// trailing partial bin never materializes.
inline std::vector<SpikeCountFrame> bin_events(const EventStream& stream,
                                               const BinningConfig& cfg) {
  if (cfg.bin_length_us < 1) throw std::invalid_argument("bin_length must be >= 1 us");
  std::vector<SpikeCountFrame> frames;
  if (stream.events.empty()) return frames;

  const std::uint64_t last_t = stream.events.back().t;
  const std::uint64_t bin_count = last_t / cfg.bin_length_us + 1;
  frames.reserve(bin_count);
  for (std::uint64_t k = 0; k < bin_count; ++k) {
    frames.push_back(make_frame(stream.geometry, k, k * cfg.bin_length_us));
  }
  for (const Event& e : stream.events) {
    if (!polarity_selected(cfg.polarity_mode, e.p)) continue;
    frames[e.t / cfg.bin_length_us].at(e.x, e.y) += 1;
  }
  return frames;
}

struct FrameStats {
  std::uint64_t total_events = 0;
  std::uint64_t active_pixels = 0;
  std::uint32_t max_count = 0;
};

inline FrameStats frame_stats(const SpikeCountFrame& frame) {
  FrameStats s;
  for (std::uint32_t c : frame.counts) {
    s.total_events += c;
    if (c > 0) ++s.active_pixels;
    if (c > s.max_count) s.max_count = c;
  }
  return s;
}

/// Linear scaling of counts to 8-bit gray, full white at the frame maximum.
inline std::vector<std::uint8_t> frame_to_gray(const SpikeCountFrame& frame) {
  std::vector<std::uint8_t> gray(frame.counts.size(), 0);
  const std::uint32_t max = frame_stats(frame).max_count;
  if (max == 0) return gray;
  for (std::size_t i = 0; i < frame.counts.size(); ++i) {
    gray[i] = std::uint8_t((std::uint64_t(frame.counts[i]) * 255) / max);
  }
  return gray;
}

}  // namespace evtrack
