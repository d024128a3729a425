#pragma once

#include <cstdint>
#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "evtrack/events.hpp"

namespace evtrack {

/// Malformed input data; the message names the byte offset, record index,
/// or line number of the first problem.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// '#'-prefixed text lines preceding the binary records of an AER file.
struct AedatHeader {
  std::vector<std::string> header_lines;
  std::string declared_version;  // e.g. "AER-DAT2.0", empty if absent
};

namespace detail {

inline std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void write_be32(std::string& out, std::uint32_t v) {
  out.push_back(char((v >> 24) & 0xFF));
  out.push_back(char((v >> 16) & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
  out.push_back(char(v & 0xFF));
}

}  // namespace detail

// DVS128 address word layout: bit 0 = polarity (1 -> +1), bits 1-7 = x,
// bits 8-14 = y, bits 15-31 must be zero.
inline constexpr std::uint32_t kAedatAddrPolarityMask = 0x1;
inline constexpr std::uint32_t kAedatAddrKnownMask = 0x7FFF;

/// Parses a jAER-style binary recording: optional '#' header lines followed
/// by consecutive 8-byte big-endian (address, timestamp) records.
inline std::pair<AedatHeader, EventStream> read_aedat(std::string_view bytes,
                                                      Geometry geom = {}) {
  AedatHeader header;
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] == '#') {
    std::size_t eol = bytes.find('\n', pos);
    std::size_t end = (eol == std::string_view::npos) ? bytes.size() : eol;
    std::string line(bytes.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    header.header_lines.push_back(line);
    pos = (eol == std::string_view::npos) ? bytes.size() : eol + 1;
  }
  if (!header.header_lines.empty() &&
      header.header_lines.front().rfind("#!", 0) == 0) {
    header.declared_version = header.header_lines.front().substr(2);
  }

  EventStream stream;
  stream.geometry = geom;
  const std::size_t body = bytes.size() - pos;
  if (body % 8 != 0) {
    // offset is relative to the first record, i.e. past the text header
    throw FormatError("truncated record at offset " +
                      std::to_string((body / 8) * 8));
  }
  stream.events.reserve(body / 8);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint32_t prev_ts = 0;
  for (std::size_t rec = 0; rec < body / 8; ++rec) {
    const unsigned char* p = data + pos + rec * 8;
    const std::uint32_t addr = detail::read_be32(p);
    const std::uint32_t ts = detail::read_be32(p + 4);
    if (addr & ~kAedatAddrKnownMask) {
      throw FormatError("unsupported address bits at record " +
                        std::to_string(rec));
    }
    if (rec > 0 && ts < prev_ts) {
      throw FormatError("timestamp decreases at record " + std::to_string(rec) +
                        " (32-bit wraparound not supported)");
    }
    prev_ts = ts;
    Event e;
    e.p = (addr & kAedatAddrPolarityMask) ? Polarity::positive : Polarity::negative;
    e.x = std::uint16_t((addr >> 1) & 0x7F);
    e.y = std::uint16_t((addr >> 8) & 0x7F);
    e.t = ts;
    stream.events.push_back(e);
  }
  return {header, stream};
}

/// Writes the DVS128 binary layout. Coordinates must fit 7 bits and
/// timestamps 32 bits.
inline std::string write_aedat(const EventStream& stream,
                               const AedatHeader* header = nullptr) {
  std::string out;
  if (header) {
    for (const auto& line : header->header_lines) {
      out += line;
      out += "\r\n";
    }
  } else {
    out += "#!AER-DAT2.0\r\n";
  }
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    if (e.x > 0x7F || e.y > 0x7F) {
      throw FormatError("coordinates exceed 7-bit address field at event " +
                        std::to_string(i));
    }
    if (e.t > 0xFFFFFFFFull) {
      throw FormatError("timestamp exceeds 32 bits at event " +
                        std::to_string(i) + " (stream longer than ~71 minutes)");
    }
    std::uint32_t addr = (std::uint32_t(e.y) << 8) | (std::uint32_t(e.x) << 1) |
                         (e.p == Polarity::positive ? 1u : 0u);
    detail::write_be32(out, addr);
    detail::write_be32(out, std::uint32_t(e.t));
  }
  return out;
}

inline constexpr std::string_view kTextHeader = "t_us,x,y,p";

/// Canonical text interchange format: header line then "t,x,y,p" per event.
inline std::string write_events_text(const EventStream& stream) {
  std::string out;
  out.reserve(16 + stream.events.size() * 16);
  out += kTextHeader;
  out += '\n';
  for (const Event& e : stream.events) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += (e.p == Polarity::positive) ? "1" : "-1";
    out += '\n';
  }
  return out;
}

inline EventStream read_events_text(std::string_view text, Geometry geom = {}) {
  EventStream stream;
  stream.geometry = geom;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t eol = text.find('\n', pos);
    std::size_t end = (eol == std::string_view::npos) ? text.size() : eol;
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != kTextHeader) {
    throw FormatError("line 1: expected header \"" + std::string(kTextHeader) + "\"");
  }
  auto parse_u64 = [&](std::string_view tok, std::uint64_t& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
  };
  while (next_line(line)) {
    if (line.empty()) continue;
    std::uint64_t fields[3];
    std::string_view rest = line;
    for (int f = 0; f < 3; ++f) {
      std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos)
        throw FormatError("line " + std::to_string(line_no) + ": expected 4 fields");
      if (!parse_u64(rest.substr(0, comma), fields[f]))
        throw FormatError("line " + std::to_string(line_no) + ": bad integer field");
      rest.remove_prefix(comma + 1);
    }
    Polarity p;
    if (rest == "1" || rest == "+1") {
      p = Polarity::positive;
    } else if (rest == "-1") {
      p = Polarity::negative;
    } else {
      throw FormatError("line " + std::to_string(line_no) + ": bad polarity token \"" +
                        std::string(rest) + "\"");
    }
    if (fields[1] > 0xFFFF || fields[2] > 0xFFFF)
      throw FormatError("line " + std::to_string(line_no) + ": coordinate out of range");
    Event e;
    e.t = fields[0];
    e.x = std::uint16_t(fields[1]);
    e.y = std::uint16_t(fields[2]);
    e.p = p;
    stream.events.push_back(e);
  }
  return stream;
}

}  // namespace evtrack
