#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "evtrack/events.hpp"

namespace evtrack {

/// Time-ordered stack of intensity grids sampled at a fixed period.
struct IntensitySequence {
  Geometry geometry{};
  std::uint64_t sample_period_us = 1000;
  std::vector<std::vector<double>> samples;  // each geometry.w * geometry.h
};

struct SensorParams {
  double theta = 0.1;            // relative log-intensity threshold
  double intensity_floor = 1e-6; // clamp before taking logarithms
  double noise_rate = 0.0;       // background events per pixel per second
  std::uint64_t seed = 0;

  void validate() const {
    if (theta <= 0) throw std::invalid_argument("theta must be positive");
    if (intensity_floor <= 0)
      throw std::invalid_argument("intensity_floor must be positive");
    if (noise_rate < 0) throw std::invalid_argument("noise_rate must be >= 0");
  }
};

/// Disk of foreground intensity over a uniform background, moving at constant
/// speed and reflecting off the frame border so long runs stay in-frame.
struct BallScene {
  double start_x = 20, start_y = 20;  // center, pixels
  double vx = 60, vy = 60;            // pixels per second
  double radius = 6;
  double fg = 12.0;
  double bg = 1.0;
};

/// A fixed intensity bitmap panned across the sensor with bilinear sampling;
/// background intensity outside the bitmap. A nonzero amplitude folds the pan
/// offset into a back-and-forth sweep, amplitude 0 pans linearly.
struct TexturePanScene {
  int bitmap_w = 0, bitmap_h = 0;
  std::vector<double> bitmap;  // row-major bitmap_w * bitmap_h
  double vx = 60, vy = 60;     // pixels per second
  double amp_x = 0, amp_y = 0; // fold extent of the pan offset, pixels
  double bg = 1.0;
};

struct SceneSpec {
  Geometry geometry{};
  std::variant<BallScene, TexturePanScene> variant = BallScene{};
  std::uint64_t duration_us = 6'000'000;
  std::uint64_t render_period_us = 1000;

  void validate() const {
    if (duration_us < render_period_us)
      throw std::invalid_argument("duration must cover at least one render period");
    if (render_period_us < 1)
      throw std::invalid_argument("render_period must be >= 1 us");
    if (const auto* ball = std::get_if<BallScene>(&variant)) {
      if (ball->radius <= 0) throw std::invalid_argument("radius must be positive");
      if (!std::isfinite(ball->vx) || !std::isfinite(ball->vy))
        throw std::invalid_argument("velocity must be finite");
      if (ball->start_x < 0 || ball->start_x > geometry.width - 1 ||
          ball->start_y < 0 || ball->start_y > geometry.height - 1)
        throw std::invalid_argument("ball initially outside the frame");
    } else {
      const auto& pan = std::get<TexturePanScene>(variant);
      if (pan.bitmap_w < 1 || pan.bitmap_h < 1 ||
          std::size_t(pan.bitmap_w) * pan.bitmap_h != pan.bitmap.size())
        throw std::invalid_argument("bad bitmap dimensions");
      if (!std::isfinite(pan.vx) || !std::isfinite(pan.vy))
        throw std::invalid_argument("velocity must be finite");
    }
  }
};

namespace detail {

/// Folds p into [lo, hi] as a triangle wave (elastic reflection).
inline double reflect(double p, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0) return lo;
  double u = std::fmod(p - lo, 2 * span);
  if (u < 0) u += 2 * span;
  return lo + (u <= span ? u : 2 * span - u);
}

}  // namespace detail

/// Ball center at time t, with border reflection keeping the disk in-frame.
inline std::pair<double, double> ball_center_at(const BallScene& ball,
                                                const Geometry& geom,
                                                double t_us) {
  const double t_s = t_us * 1e-6;
  const double lo_x = ball.radius, hi_x = geom.width - 1 - ball.radius;
  const double lo_y = ball.radius, hi_y = geom.height - 1 - ball.radius;
  return {detail::reflect(ball.start_x + ball.vx * t_s, lo_x, hi_x),
          detail::reflect(ball.start_y + ball.vy * t_s, lo_y, hi_y)};
}

/// Pan offset at time t; amplitude 0 means a plain linear pan.
inline std::pair<double, double> pan_offset_at(const TexturePanScene& pan,
                                               double t_us) {
  const double t_s = t_us * 1e-6;
  const double px = pan.vx * t_s;
  const double py = pan.vy * t_s;
  return {pan.amp_x > 0 ? detail::reflect(px, 0, pan.amp_x) : px,
          pan.amp_y > 0 ? detail::reflect(py, 0, pan.amp_y) : py};
}

/// Renders the intensity grid of one scene variant at time t.
inline std::vector<double> render_sample(const SceneSpec& spec, double t_us) {
  const int w = spec.geometry.width, h = spec.geometry.height;
  std::vector<double> grid(std::size_t(w) * h);
  if (const auto* ball = std::get_if<BallScene>(&spec.variant)) {
    const auto [cx, cy] = ball_center_at(*ball, spec.geometry, t_us);
    const double r = ball->radius;
    const double r2 = r * r;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // fast path away from the rim, 4x4 supersampled coverage at it
        const double dx = x - cx, dy = y - cy;
        const double d = std::sqrt(dx * dx + dy * dy);
        double value;
        if (d <= r - 0.75) {
          value = ball->fg;
        } else if (d >= r + 0.75) {
          value = ball->bg;
        } else {
          int inside = 0;
          for (int sy = 0; sy < 4; ++sy) {
            for (int sx = 0; sx < 4; ++sx) {
              const double ox = x - 0.5 + (sx + 0.5) / 4.0 - cx;
              const double oy = y - 0.5 + (sy + 0.5) / 4.0 - cy;
              if (ox * ox + oy * oy <= r2) ++inside;
            }
          }
          value = ball->bg + (ball->fg - ball->bg) * (inside / 16.0);
        }
        grid[std::size_t(y) * w + x] = value;
      }
    }
  } else {
    const auto& pan = std::get<TexturePanScene>(spec.variant);
    const auto [ox, oy] = pan_offset_at(pan, t_us);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double sx = x + ox, sy = y + oy;
        double value = pan.bg;
        const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
        if (x0 >= -1 && x0 < pan.bitmap_w && y0 >= -1 && y0 < pan.bitmap_h) {
          auto tex = [&](int bx, int by) {
            if (bx < 0 || by < 0 || bx >= pan.bitmap_w || by >= pan.bitmap_h)
              return pan.bg;
            return pan.bitmap[std::size_t(by) * pan.bitmap_w + bx];
          };
          const double fx = sx - x0, fy = sy - y0;
          value = tex(x0, y0) * (1 - fx) * (1 - fy) +
                  tex(x0 + 1, y0) * fx * (1 - fy) +
                  tex(x0, y0 + 1) * (1 - fx) * fy + tex(x0 + 1, y0 + 1) * fx * fy;
        }
        grid[std::size_t(y) * w + x] = value;
      }
    }
  }
  return grid;
}

/// Materializes every render tick. Fine for short scenes and tests; long
/// scenes should go through the streaming generate_events(SceneSpec, ...).
inline IntensitySequence render_scene(const SceneSpec& spec) {
  spec.validate();
  IntensitySequence seq;
  seq.geometry = spec.geometry;
  seq.sample_period_us = spec.render_period_us;
  const std::uint64_t ticks = spec.duration_us / spec.render_period_us;
  seq.samples.reserve(ticks + 1);
  for (std::uint64_t k = 0; k <= ticks; ++k) {
    seq.samples.push_back(render_sample(spec, double(k * spec.render_period_us)));
  }
  return seq;
}

namespace detail {

/// Per-pixel threshold-crossing state for the log-intensity contrast model.
/// Reference levels advance by whole multiples of theta; sub-threshold
/// residual carries across sample intervals.
class EventAccumulator {
 public:
  EventAccumulator(Geometry geom, const SensorParams& params)
      : geom_(geom), params_(params) {}

  void start(const std::vector<double>& first_sample) {
    const std::size_t n = std::size_t(geom_.pixel_count());
    log_ref_.resize(n);
    log_prev_.resize(n);
    last_t_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      log_ref_[i] = log_prev_[i] =
          std::log(std::max(first_sample[i], params_.intensity_floor));
    }
  }

  void feed(const std::vector<double>& sample, std::uint64_t t0,
            std::uint64_t t1) {
    const int w = geom_.width;
    const double dt = double(t1 - t0);
    for (int y = 0; y < geom_.height; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = std::size_t(y) * w + x;
        const double level =
            std::log(std::max(sample[i], params_.intensity_floor));
        const double diff = level - log_ref_[i];
        // closed threshold: a crossing landing exactly on a level counts
        const std::int64_t k =
            std::int64_t(std::floor(std::abs(diff) / params_.theta + 1e-9));
        if (k > 0) {
          const int sign = diff > 0 ? +1 : -1;
          const double ramp = level - log_prev_[i];
          for (std::int64_t j = 1; j <= k; ++j) {
            const double target = log_ref_[i] + double(j) * params_.theta * sign;
            double frac = 0.5;
            if (std::abs(ramp) > 1e-300)
              frac = (target - log_prev_[i]) / ramp;
            frac = std::clamp(frac, 0.0, 1.0 - 1e-9);
            std::int64_t t = std::int64_t(t0) + std::int64_t(frac * dt);
            if (t <= last_t_[i]) t = last_t_[i] + 1;
            last_t_[i] = t;
            Event e;
            e.x = std::uint16_t(x);
            e.y = std::uint16_t(y);
            e.t = std::uint64_t(t);
            e.p = sign > 0 ? Polarity::positive : Polarity::negative;
            events_.push_back(e);
          }
          log_ref_[i] += double(k) * params_.theta * sign;
        }
        log_prev_[i] = level;
      }
    }
  }

  EventStream finish(std::uint64_t duration_us) {
    EventStream stream;
    stream.geometry = geom_;
    if (params_.noise_rate > 0) {
      std::mt19937_64 rng(params_.seed);
      std::poisson_distribution<int> count_dist(params_.noise_rate *
                                                duration_us * 1e-6);
      std::uniform_int_distribution<std::uint64_t> t_dist(0, duration_us - 1);
      std::uniform_int_distribution<int> p_dist(0, 1);
      for (int y = 0; y < geom_.height; ++y) {
        for (int x = 0; x < geom_.width; ++x) {
          const int count = count_dist(rng);
          for (int c = 0; c < count; ++c) {
            Event e;
            e.x = std::uint16_t(x);
            e.y = std::uint16_t(y);
            e.t = t_dist(rng);
            e.p = p_dist(rng) ? Polarity::positive : Polarity::negative;
            events_.push_back(e);
          }
        }
      }
    }
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    stream.events = std::move(events_);
    return stream;
  }

 private:
  Geometry geom_;
  SensorParams params_;
  std::vector<double> log_ref_;
  std::vector<double> log_prev_;
  std::vector<std::int64_t> last_t_;
  std::vector<Event> events_;
};

}  // namespace detail

/// Converts a materialized intensity sequence into an event stream.
inline EventStream generate_events(const IntensitySequence& scene,
                                   const SensorParams& params) {
  params.validate();
  if (scene.samples.size() < 2)
    throw std::invalid_argument("intensity sequence needs at least 2 samples");
  if (scene.sample_period_us < 1)
    throw std::invalid_argument("sample_period must be >= 1 us");
  detail::EventAccumulator acc(scene.geometry, params);
  acc.start(scene.samples.front());
  for (std::size_t k = 1; k < scene.samples.size(); ++k) {
    acc.feed(scene.samples[k], (k - 1) * scene.sample_period_us,
             k * scene.sample_period_us);
  }
  return acc.finish((scene.samples.size() - 1) * scene.sample_period_us);
}

/// Streaming variant: renders one tick at a time so long scenes never hold
/// the whole intensity stack in memory.
inline EventStream generate_events(const SceneSpec& spec,
                                   const SensorParams& params) {
  spec.validate();
  params.validate();
  detail::EventAccumulator acc(spec.geometry, params);
  acc.start(render_sample(spec, 0));
  const std::uint64_t ticks = spec.duration_us / spec.render_period_us;
  for (std::uint64_t k = 1; k <= ticks; ++k) {
    acc.feed(render_sample(spec, double(k * spec.render_period_us)),
             (k - 1) * spec.render_period_us, k * spec.render_period_us);
  }
  return acc.finish(ticks * spec.render_period_us);
}

/// Noiseless dry run divided by the number of complete bins; used to tune
/// scenes into a target events-per-bin regime.
inline double event_rate_estimate(const SceneSpec& spec,
                                  const SensorParams& params,
                                  std::uint64_t bin_length_us = 10000) {
  SensorParams quiet = params;
  quiet.noise_rate = 0;
  const EventStream stream = generate_events(spec, quiet);
  const std::uint64_t bins = spec.duration_us / bin_length_us;
  if (bins == 0) return 0;
  return double(stream.events.size()) / double(bins);
}

}  // namespace evtrack
