#pragma once

#include <cmath>
#include <random>

#include "evtrack/simulator.hpp"

namespace evtrack {

/// Canonical moving-ball demo scene: a bright disk bouncing diagonally across
/// the frame. Defaults land in the ~500 events-per-bin regime at theta = 0.1.
inline SceneSpec make_ball_demo(Geometry geom = {}, double start_x = 20,
                                double start_y = 20, double vx = 60,
                                double vy = 60, double radius = 6,
                                double fg = 12.0, double bg = 1.0,
                                std::uint64_t duration_us = 6'000'000) {
  SceneSpec spec;
  spec.geometry = geom;
  spec.duration_us = duration_us;
  BallScene ball;
  ball.start_x = start_x;
  ball.start_y = start_y;
  ball.vx = vx;
  ball.vy = vy;
  ball.radius = radius;
  ball.fg = fg;
  ball.bg = bg;
  spec.variant = ball;
  return spec;
}

struct TextureDemo {
  SceneSpec spec;
  // digit stroke-box center in bitmap coordinates; its frame position at
  // time t is (cx - offset_x(t), cy - offset_y(t))
  double digit_cx = 0;
  double digit_cy = 0;
  double digit_w = 0;
  double digit_h = 0;
};

/// Digit-like glyph panned back and forth over a cluttered background,
/// emulating a sensor swept across a static printed scene. The bitmap covers
/// the whole panned field; clutter blobs keep clear of the glyph. The default
/// velocity split favors x: at every vertical fold of the pan the horizontal
/// glyph edges briefly stop emitting events, and a slow vertical sweep keeps
/// the appearance model from drifting onto a vertically shifted attractor
/// during those gaps (total speed stays ~85 px/s).
inline TextureDemo make_texture_demo(Geometry geom = {}, double vx = 80,
                                     double vy = 28, double amp_x = 80,
                                     double amp_y = 24, double fg = 12.0,
                                     double bg = 1.0,
                                     std::uint64_t duration_us = 4'000'000,
                                     std::uint64_t clutter_seed = 7) {
  TexturePanScene pan;
  pan.vx = vx;
  pan.vy = vy;
  pan.amp_x = amp_x;
  pan.amp_y = amp_y;
  pan.bg = bg;
  pan.bitmap_w = geom.width + int(std::ceil(amp_x));
  pan.bitmap_h = geom.height + int(std::ceil(amp_y));
  pan.bitmap.assign(std::size_t(pan.bitmap_w) * pan.bitmap_h, bg);

  auto fill = [&](int x0, int y0, int w, int h, double value) {
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        if (x >= 0 && y >= 0 && x < pan.bitmap_w && y < pan.bitmap_h)
          pan.bitmap[std::size_t(y) * pan.bitmap_w + x] = value;
      }
    }
  };

  // glyph '3': three horizontal bars joined on the right. Centered in the
  // bitmap region that stays visible across the whole pan sweep, so the
  // digit never leaves the frame. Stroke widths and bar spacing are uneven
  // on purpose: a vertically periodic glyph self-aliases under vertical
  // motion and lets the tracker lock half a bar pitch off.
  const int gw = 24, gh = 34;
  const int gx = (int(amp_x) + geom.width - gw) / 2;
  const int gy = (int(amp_y) + geom.height - gh) / 2;
  fill(gx, gy, gw, 6, fg);              // top bar
  fill(gx + 8, gy + 13, gw - 8, 4, fg);  // middle bar, shorter and thinner
  fill(gx, gy + 26, gw, 8, fg);         // bottom bar, thickest
  fill(gx + gw - 6, gy, 6, gh, fg);     // right stem
  for (int d = 0; d < 14; ++d) {        // diagonal tail, ties x edges to y
    fill(gx + 2 + d, gy + 8 + d, 4, 1, fg);
  }

  // deterministic clutter blobs away from the glyph
  std::mt19937_64 rng(clutter_seed);
  std::uniform_int_distribution<int> bx(0, pan.bitmap_w - 1);
  std::uniform_int_distribution<int> by(0, pan.bitmap_h - 1);
  std::uniform_int_distribution<int> br(2, 4);
  std::uniform_real_distribution<double> bi(0.4 * fg, 0.8 * fg);
  const int clearance = 18;
  for (int blob = 0; blob < 40; ++blob) {
    const int cx = bx(rng), cy = by(rng), r = br(rng);
    const double value = bi(rng);
    if (cx > gx - clearance && cx < gx + gw + clearance &&
        cy > gy - clearance && cy < gy + gh + clearance)
      continue;
    for (int y = cy - r; y <= cy + r; ++y) {
      for (int x = cx - r; x <= cx + r; ++x) {
        if (x < 0 || y < 0 || x >= pan.bitmap_w || y >= pan.bitmap_h) continue;
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
          pan.bitmap[std::size_t(y) * pan.bitmap_w + x] = value;
      }
    }
  }

  TextureDemo demo;
  demo.digit_cx = gx + gw / 2.0;
  demo.digit_cy = gy + gh / 2.0;
  demo.digit_w = gw;
  demo.digit_h = gh;
  demo.spec.geometry = geom;
  demo.spec.duration_us = duration_us;
  demo.spec.variant = pan;
  return demo;
}

}  // namespace evtrack
