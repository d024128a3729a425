#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evtrack {

/// Sign of the log-intensity change that triggered a spike.
enum class Polarity : std::int8_t { negative = -1, positive = +1 };

inline int polarity_sign(Polarity p) { return p == Polarity::positive ? +1 : -1; }

struct Geometry {
  int width = 128;
  int height = 128;
  bool operator==(const Geometry&) const = default;
  std::int64_t pixel_count() const { return std::int64_t(width) * height; }
};

/// One AER spike: pixel address, microsecond timestamp, polarity.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint64_t t = 0;  // microseconds
  Polarity p = Polarity::positive;
  bool operator==(const Event&) const = default;
};

/// Time-ordered event sequence with its declared sensor geometry.
struct EventStream {
  Geometry geometry{};
  std::vector<Event> events;
};

/// Per-pixel spike counts accumulated over one time bin.
struct SpikeCountFrame {
  Geometry geometry{};
  std::vector<std::uint32_t> counts;  // row-major, geometry.width * geometry.height
  std::uint64_t bin_index = 0;
  std::uint64_t t_start = 0;  // microseconds

  std::uint32_t at(int x, int y) const {
    return counts[std::size_t(y) * geometry.width + x];
  }
  std::uint32_t& at(int x, int y) {
    return counts[std::size_t(y) * geometry.width + x];
  }
};

inline SpikeCountFrame make_frame(Geometry g, std::uint64_t bin_index = 0,
                                  std::uint64_t t_start = 0) {
  SpikeCountFrame f;
  f.geometry = g;
  f.counts.assign(std::size_t(g.pixel_count()), 0);
  f.bin_index = bin_index;
  f.t_start = t_start;
  return f;
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks coordinate bounds and timestamp ordering; reports every violation
/// with the index of the offending event.
inline ValidationReport validate_stream(const EventStream& s) {
  ValidationReport report;
  std::uint64_t prev_t = 0;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const Event& e = s.events[i];
    if (e.x >= s.geometry.width)
      report.violations.push_back("x out of range at index " + std::to_string(i));
    if (e.y >= s.geometry.height)
      report.violations.push_back("y out of range at index " + std::to_string(i));
    if (i > 0 && e.t < prev_t)
      report.violations.push_back("timestamp inversion at index " + std::to_string(i));
    prev_t = e.t;
  }
  return report;
}

}  // namespace evtrack
