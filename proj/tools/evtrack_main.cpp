// Command-line surface of the event tracking toolkit: scene simulation,
// tracking, rendering, and throughput benchmarking.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evtrack/binning.hpp"
#include "evtrack/io.hpp"
#include "evtrack/scenes.hpp"
#include "evtrack/simulator.hpp"
#include "evtrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace evtrack;

namespace {

constexpr const char* kVersion = "evtrack 0.1.0";

// exit statuses: stable contract for scripting
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitEmpty = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file_atomic(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(data.data(), std::streamsize(data.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  // missing/unreadable input is a usage error (exit 2), not a write failure
  if (!in) throw std::runtime_error("cannot open input: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    entries.emplace_back(key, buf);
  }
  void add(const std::string& key, std::uint64_t value) {
    entries.emplace_back(key, std::to_string(value));
  }
  void add(const std::string& key, int value) {
    entries.emplace_back(key, std::to_string(value));
  }
  void write(const fs::path& out_path) const {
    std::string text = std::string("version=") + kVersion + "\n";
    for (const auto& [k, v] : entries) text += k + "=" + v + "\n";
    fs::path p = out_path;
    p += ".manifest";
    write_file_atomic(p, text);
  }
};

EventStream load_stream(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.rfind(kTextHeader, 0) == 0) return read_events_text(bytes);
  return read_aedat(bytes).second;
}

std::string format_record(const TrajectoryRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu,%llu,%d,%d,%d,%d,%.6f,%llu\n",
                (unsigned long long)r.bin_index, (unsigned long long)r.t_start,
                r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h, r.score,
                (unsigned long long)r.events_in_bin);
  return buf;
}

std::string render_frame_ppm(const SpikeCountFrame& frame,
                             const BoundingBox& box) {
  const int w = frame.geometry.width, h = frame.geometry.height;
  const std::vector<std::uint8_t> gray = frame_to_gray(frame);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> rgb(std::size_t(w) * h * 3);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = gray[i];
  }
  auto paint_red = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const std::size_t i = (std::size_t(y) * w + x) * 3;
    rgb[i] = 255;
    rgb[i + 1] = 0;
    rgb[i + 2] = 0;
  };
  for (int x = box.x; x < box.x + box.w; ++x) {
    paint_red(x, box.y);
    paint_red(x, box.y + box.h - 1);
  }
  for (int y = box.y; y < box.y + box.h; ++y) {
    paint_red(box.x, y);
    paint_red(box.x + box.w - 1, y);
  }
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

BoundingBox parse_bbox(const std::string& text) {
  BoundingBox box;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d", &box.x, &box.y, &box.w,
                  &box.h) != 4) {
    throw CLI::ValidationError("--bbox", "expected X,Y,W,H");
  }
  return box;
}

struct SimulateArgs {
  double duration_s = 6.0;
  double render_period_ms = 1.0;
  double theta = 0.1;
  double noise_rate = 0.0;
  std::uint64_t seed = 1;
  double bin_preview_ms = 10.0;
  int width = 128, height = 128;
  std::string out;
  std::string format = "text";
  // ball
  std::vector<double> start{20, 20};
  std::vector<double> velocity{60, 60};
  double radius = 6;
  double fg = 12.0;
  double bg = 1.0;
  // texture
  std::vector<double> amplitude{80, 24};
};

int run_simulate(const SimulateArgs& a, bool ball) {
  const Geometry geom{a.width, a.height};
  SceneSpec spec;
  if (ball) {
    spec = make_ball_demo(geom, a.start[0], a.start[1], a.velocity[0],
                          a.velocity[1], a.radius, a.fg, a.bg,
                          std::uint64_t(a.duration_s * 1e6));
  } else {
    spec = make_texture_demo(geom, a.velocity[0], a.velocity[1], a.amplitude[0],
                             a.amplitude[1], a.fg, a.bg,
                             std::uint64_t(a.duration_s * 1e6), a.seed)
               .spec;
  }
  spec.render_period_us = std::uint64_t(a.render_period_ms * 1000);

  SensorParams params;
  params.theta = a.theta;
  params.noise_rate = a.noise_rate;
  params.seed = a.seed;

  const EventStream stream = generate_events(spec, params);
  std::string payload;
  if (a.format == "text") {
    payload = write_events_text(stream);
  } else if (a.format == "aedat") {
    payload = write_aedat(stream);
  } else {
    throw CLI::ValidationError("--format", "expected text or aedat");
  }
  write_file_atomic(a.out, payload);

  const std::uint64_t preview_bin = std::uint64_t(a.bin_preview_ms * 1000);
  const std::uint64_t bins = spec.duration_us / preview_bin;
  const double per_bin =
      bins ? double(stream.events.size()) / double(bins) : 0.0;

  Manifest m;
  m.add("command", std::string(ball ? "simulate ball" : "simulate texture"));
  m.add("width", a.width);
  m.add("height", a.height);
  m.add("duration_s", a.duration_s);
  m.add("render_period_ms", a.render_period_ms);
  m.add("theta", a.theta);
  m.add("noise_rate", a.noise_rate);
  m.add("seed", a.seed);
  m.add("format", a.format);
  if (ball) {
    m.add("start_x", a.start[0]);
    m.add("start_y", a.start[1]);
    m.add("radius", a.radius);
  } else {
    m.add("amplitude_x", a.amplitude[0]);
    m.add("amplitude_y", a.amplitude[1]);
  }
  m.add("velocity_x", a.velocity[0]);
  m.add("velocity_y", a.velocity[1]);
  m.add("fg", a.fg);
  m.add("bg", a.bg);
  m.add("events", std::uint64_t(stream.events.size()));
  m.add("out", a.out);
  m.write(a.out);

  std::printf("events=%zu\n", stream.events.size());
  std::printf("events_per_bin_mean=%.3f (bin %.3f ms)\n", per_bin,
              a.bin_preview_ms);
  return kExitOk;
}

struct TrackArgs {
  std::string input;
  std::string bbox;
  double bin_ms = 10.0;
  std::string polarity = "both";
  int gamma = 20, alpha = 4, neg_inner = 8, neg_outer = 30, negatives = 50;
  int features = 50;
  double lambda = 0.85;
  std::uint64_t seed = 1;
  std::string out;
  std::string render_dir;
  int reps = 3;  // bench only
};

TrackerConfig make_config(const TrackArgs& a) {
  TrackerConfig cfg;
  cfg.search_radius = a.gamma;
  cfg.positive_radius = a.alpha;
  cfg.neg_inner = a.neg_inner;
  cfg.neg_outer = a.neg_outer;
  cfg.negative_count = a.negatives;
  cfg.n_features = a.features;
  cfg.lambda = a.lambda;
  cfg.seed = a.seed;
  return cfg;
}

BinningConfig make_binning(const TrackArgs& a) {
  BinningConfig cfg;
  cfg.bin_length_us = std::uint64_t(a.bin_ms * 1000);
  if (a.polarity == "both") {
    cfg.polarity_mode = PolarityMode::both_summed;
  } else if (a.polarity == "pos") {
    cfg.polarity_mode = PolarityMode::positive_only;
  } else if (a.polarity == "neg") {
    cfg.polarity_mode = PolarityMode::negative_only;
  } else {
    throw CLI::ValidationError("--polarity", "expected both, pos or neg");
  }
  return cfg;
}

void add_track_manifest(Manifest& m, const TrackArgs& a) {
  m.add("input", a.input);
  m.add("bbox", a.bbox);
  m.add("bin_ms", a.bin_ms);
  m.add("polarity", a.polarity);
  m.add("gamma", a.gamma);
  m.add("alpha", a.alpha);
  m.add("neg_inner", a.neg_inner);
  m.add("neg_outer", a.neg_outer);
  m.add("negatives", a.negatives);
  m.add("features", a.features);
  m.add("lambda", a.lambda);
  m.add("seed", a.seed);
}

int run_track(const TrackArgs& a) {
  const EventStream stream = load_stream(a.input);
  const std::vector<SpikeCountFrame> frames = bin_events(stream, make_binning(a));
  if (frames.empty()) throw EmptyResultError("no complete bins in " + a.input);

  const BoundingBox bbox0 = parse_bbox(a.bbox);
  if (!bbox0.inside(stream.geometry))
    throw std::invalid_argument("bbox outside the frame geometry");

  const std::vector<TrajectoryRecord> records =
      track(frames, bbox0, make_config(a));

  std::string table = "bin,t_start_us,x,y,w,h,score,events\n";
  for (const auto& r : records) table += format_record(r);
  write_file_atomic(a.out, table);

  if (!a.render_dir.empty()) {
    fs::create_directories(a.render_dir);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "bin_%06llu.ppm",
                    (unsigned long long)records[k].bin_index);
      write_file_atomic(fs::path(a.render_dir) / name,
                        render_frame_ppm(frames[k], records[k].bbox));
    }
  }

  Manifest m;
  m.add("command", std::string("track"));
  add_track_manifest(m, a);
  m.add("bins", std::uint64_t(records.size()));
  m.add("out", a.out);
  if (!a.render_dir.empty()) m.add("render_dir", a.render_dir);
  m.write(a.out);

  std::printf("bins=%zu\n", records.size());
  return kExitOk;
}

int run_bench(const TrackArgs& a) {
  const EventStream stream = load_stream(a.input);
  const std::vector<SpikeCountFrame> frames = bin_events(stream, make_binning(a));
  if (frames.empty()) throw EmptyResultError("no complete bins in " + a.input);

  const BoundingBox bbox0 = parse_bbox(a.bbox);
  if (!bbox0.inside(stream.geometry))
    throw std::invalid_argument("bbox outside the frame geometry");
  const TrackerConfig cfg = make_config(a);

  std::vector<double> bins_per_second;
  for (int rep = 0; rep < std::max(a.reps, 1); ++rep) {
    const auto start = std::chrono::steady_clock::now();
    const auto records = track(frames, bbox0, cfg);
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(stop - start).count();
    bins_per_second.push_back(double(records.size()) / seconds);
  }
  std::sort(bins_per_second.begin(), bins_per_second.end());
  const double median = bins_per_second[bins_per_second.size() / 2];

  double events_total = 0;
  for (const auto& f : frames) events_total += double(frame_stats(f).total_events);
  const double events_per_bin = events_total / double(frames.size());
  const double reduction =
      events_per_bin / double(stream.geometry.pixel_count());

  std::printf("bins=%zu\n", frames.size());
  std::printf("bins_per_second_median=%.2f\n", median);
  std::printf("events_per_bin_mean=%.3f\n", events_per_bin);
  std::printf("reduction_ratio=%.6f\n", reduction);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuromorphic-vision compressive tracking toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Synthesize a DVS event stream");
  simulate->require_subcommand(1);
  bool scene_is_ball = true;
  auto add_common_sim = [&](CLI::App* sub) {
    sub->add_option("--duration-s", sim.duration_s, "Scene duration, seconds");
    sub->add_option("--render-period-ms", sim.render_period_ms,
                    "Intensity sampling period, ms");
    sub->add_option("--theta", sim.theta, "Relative log-intensity threshold");
    sub->add_option("--noise-rate", sim.noise_rate,
                    "Background noise events per pixel per second");
    sub->add_option("--seed", sim.seed, "RNG seed");
    sub->add_option("--bin-preview-ms", sim.bin_preview_ms,
                    "Bin length for the events-per-bin preview, ms");
    sub->add_option("--width", sim.width, "Sensor width, pixels");
    sub->add_option("--height", sim.height, "Sensor height, pixels");
    sub->add_option("--velocity", sim.velocity, "Velocity VX VY, px/s")
        ->expected(2);
    sub->add_option("--fg", sim.fg, "Foreground intensity");
    sub->add_option("--bg", sim.bg, "Background intensity");
    sub->add_option("--out", sim.out, "Output event file")->required();
    sub->add_option("--format", sim.format, "Output format: text or aedat");
  };
  CLI::App* sim_ball = simulate->add_subcommand("ball", "Bouncing ball scene");
  add_common_sim(sim_ball);
  sim_ball->add_option("--start", sim.start, "Ball start center X Y, px")
      ->expected(2);
  sim_ball->add_option("--radius", sim.radius, "Ball radius, px");
  sim_ball->callback([&] { scene_is_ball = true; });
  CLI::App* sim_tex =
      simulate->add_subcommand("texture", "Panned cluttered digit scene");
  add_common_sim(sim_tex);
  sim_tex->add_option("--amplitude", sim.amplitude, "Pan fold extent AX AY, px")
      ->expected(2);
  sim_tex->callback([&] {
    scene_is_ball = false;
    // texture scene default differs from the ball's diagonal sweep
    if (sim_tex->count("--velocity") == 0) sim.velocity = {80, 28};
  });

  TrackArgs trk;
  auto add_track_opts = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--input", trk.input, "Event file (text or aedat)")
        ->required();
    sub->add_option("--bbox", trk.bbox, "Initial box X,Y,W,H")->required();
    sub->add_option("--bin-ms", trk.bin_ms, "Time bin length, ms");
    sub->add_option("--polarity", trk.polarity, "both, pos or neg");
    sub->add_option("--gamma", trk.gamma, "Search radius, px");
    sub->add_option("--alpha", trk.alpha, "Positive sample radius, px");
    sub->add_option("--neg-inner", trk.neg_inner, "Negative annulus inner, px");
    sub->add_option("--neg-outer", trk.neg_outer, "Negative annulus outer, px");
    sub->add_option("--negatives", trk.negatives, "Negative samples per update");
    sub->add_option("--features", trk.features, "Compressed feature count");
    sub->add_option("--lambda", trk.lambda, "Learning factor");
    sub->add_option("--seed", trk.seed, "RNG seed");
    if (with_out) {
      sub->add_option("--out", trk.out, "Trajectory output file")->required();
      sub->add_option("--render", trk.render_dir,
                      "Directory for per-bin P6 renderings");
    }
  };
  CLI::App* track_cmd = app.add_subcommand("track", "Track one object in an event file");
  add_track_opts(track_cmd, true);
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Measure tracking throughput");
  add_track_opts(bench_cmd, false);
  bench_cmd->add_option("--reps", trk.reps, "Benchmark repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, scene_is_ball);
    if (track_cmd->parsed()) return run_track(trk);
    if (bench_cmd->parsed()) return run_bench(trk);
  } catch (const EmptyResultError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
