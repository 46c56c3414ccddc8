#pragma once
// Synthetic shape world: single colored shape on a black 100x100 canvas.
// 3 shapes x 3 colors x 3 sizes = 27 combination classes; "left" means the
// leftmost foreground pixel falls in the first 30 columns. The world can be
// sampled under the hidden constraint that yellow shapes on the left are
// always big (the rule the agent is supposed to discover), or with that
// constraint deliberately broken (outliers / test probes).

#include "aan/png_io.hpp"
#include "aan/rng.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace aan {

inline constexpr int kCanvas = 100;
inline constexpr int kLeftBand = 30;     // min foreground column < 30 => "left"
inline constexpr int kColorJitter = 25;  // per-channel, uniform, clamped

enum class Shape : std::uint8_t { circle = 0, square = 1, triangle = 2 };
enum class Color : std::uint8_t { yellow = 0, magenta = 1, cyan = 2 };
enum class Size : std::uint8_t { big = 0, medium = 1, small = 2 };

inline const char* to_string(Shape s) {
  switch (s) {
    case Shape::circle: return "circle";
    case Shape::square: return "square";
    default: return "triangle";
  }
}
inline const char* to_string(Color c) {
  switch (c) {
    case Color::yellow: return "yellow";
    case Color::magenta: return "magenta";
    default: return "cyan";
  }
}
inline const char* to_string(Size z) {
  switch (z) {
    case Size::big: return "big";
    case Size::medium: return "medium";
    default: return "small";
  }
}

template <typename E>
inline E enum_from_string(const std::string& s);

template <>
inline Shape enum_from_string<Shape>(const std::string& s) {
  if (s == "circle") return Shape::circle;
  if (s == "square") return Shape::square;
  if (s == "triangle") return Shape::triangle;
  throw std::runtime_error("unknown shape: " + s);
}
template <>
inline Color enum_from_string<Color>(const std::string& s) {
  if (s == "yellow") return Color::yellow;
  if (s == "magenta") return Color::magenta;
  if (s == "cyan") return Color::cyan;
  throw std::runtime_error("unknown color: " + s);
}
template <>
inline Size enum_from_string<Size>(const std::string& s) {
  if (s == "big") return Size::big;
  if (s == "medium") return Size::medium;
  if (s == "small") return Size::small;
  throw std::runtime_error("unknown size: " + s);
}

// Extent = half-width of the bounding square (circle radius, square half
// side, triangle half base). Ranges are disjoint so size classes never blur.
inline constexpr int kExtentLo[3] = {25, 13, 5};
inline constexpr int kExtentHi[3] = {35, 20, 10};

inline constexpr std::uint8_t kColorBase[3][3] = {
    {255, 255, 0},  // yellow
    {255, 0, 255},  // magenta
    {0, 255, 255},  // cyan
};

struct ShapeSpec {
  Shape shape = Shape::circle;
  Color color = Color::yellow;
  Size size = Size::big;
  int cx = 0;
  int cy = 0;
  int extent = 0;
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
};

// 0..26, size-major then shape then color.
inline int class_index(const ShapeSpec& s) {
  return static_cast<int>(s.size) * 9 + static_cast<int>(s.shape) * 3 +
         static_cast<int>(s.color);
}

struct ImageLabel {
  ShapeSpec spec;
  bool is_left = false;
  int class_index = 0;
};

// Pixel-center membership. The triangle is upright equilateral: horizontal
// base of length 2*extent, height sqrt(3)*extent, vertically centered in the
// bounding square, apex up. (Base corners are its leftmost/rightmost points.)
inline bool shape_contains(const ShapeSpec& s, int x, int y) {
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  switch (s.shape) {
    case Shape::circle:
      return dx * dx + dy * dy <= double(s.extent) * s.extent;
    case Shape::square:
      return std::abs(x - s.cx) <= s.extent && std::abs(y - s.cy) <= s.extent;
    case Shape::triangle: {
      const double h = std::sqrt(3.0) * s.extent;
      const double y_apex = -h / 2.0;  // relative to cy, y grows downward
      const double y_base = h / 2.0;
      if (dy < y_apex - 1e-9 || dy > y_base + 1e-9) return false;
      // Half-width grows linearly from 0 at the apex to extent at the base.
      const double hw = s.extent * (dy - y_apex) / h;
      return std::abs(dx) <= hw + 1e-9;
    }
  }
  return false;
}

// Leftmost column containing a foreground pixel, or kCanvas if none
// (cannot happen for validly placed shapes).
inline int min_foreground_column(const ShapeSpec& s) {
  const int x_lo = std::max(0, s.cx - s.extent);
  const int x_hi = std::min(kCanvas - 1, s.cx + s.extent);
  const int y_lo = std::max(0, s.cy - s.extent);
  const int y_hi = std::min(kCanvas - 1, s.cy + s.extent);
  for (int x = x_lo; x <= x_hi; ++x)
    for (int y = y_lo; y <= y_hi; ++y)
      if (shape_contains(s, x, y)) return x;
  return kCanvas;
}

inline bool spec_is_left(const ShapeSpec& s) { return min_foreground_column(s) < kLeftBand; }

inline ImageRGB render(const ShapeSpec& s) {
  ImageRGB img;
  img.width = kCanvas;
  img.height = kCanvas;
  img.pixels.assign(std::size_t(kCanvas) * kCanvas * 3, 0);
  const int x_lo = std::max(0, s.cx - s.extent);
  const int x_hi = std::min(kCanvas - 1, s.cx + s.extent);
  const int y_lo = std::max(0, s.cy - s.extent);
  const int y_hi = std::min(kCanvas - 1, s.cy + s.extent);
  for (int y = y_lo; y <= y_hi; ++y)
    for (int x = x_lo; x <= x_hi; ++x)
      if (shape_contains(s, x, y)) {
        auto* px = img.at(x, y);
        px[0] = s.rgb[0];
        px[1] = s.rgb[1];
        px[2] = s.rgb[2];
      }
  return img;
}

// Recover "left" from an actual rendered image (any non-black pixel counts
// as foreground). Used by the manifest-vs-pixels consistency checks.
inline bool compute_is_left(const ImageRGB& img) {
  for (std::uint32_t x = 0; x < img.width && x < std::uint32_t(kLeftBand); ++x)
    for (std::uint32_t y = 0; y < img.height; ++y) {
      const auto* px = img.at(x, y);
      if (px[0] | px[1] | px[2]) return true;
    }
  return false;
}

inline bool violates_hidden_rule(const ShapeSpec& s, bool left) {
  return s.color == Color::yellow && left && s.size != Size::big;
}

struct SampleConstraint {
  bool forbid_rule_breakers = false;  // reject non-big yellow lefts
  // Forced attributes (forcing `left` constrains the position draw).
  bool has_shape = false;
  Shape shape = Shape::circle;
  bool has_size = false;
  Size size = Size::big;
  bool has_color = false;
  Color color = Color::yellow;
  bool has_left = false;
  bool left = false;
};

// Rejection-samples a shape spec. All attribute draws come from `rng`, so a
// fixed rng state yields a fixed spec regardless of how many rejections
// happen along the way.
inline ImageLabel sample_shape(Rng& rng, const SampleConstraint& con = {}) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    ShapeSpec s;
    s.shape = con.has_shape ? con.shape : static_cast<Shape>(rng.below(3));
    s.color = con.has_color ? con.color : static_cast<Color>(rng.below(3));
    s.size = con.has_size ? con.size : static_cast<Size>(rng.below(3));
    const int zi = static_cast<int>(s.size);
    s.extent = static_cast<int>(rng.range(kExtentLo[zi], kExtentHi[zi]));
    // Keep the whole bounding square on canvas; the triangle is shorter
    // vertically but using the same margin keeps placement uniform per shape.
    s.cx = static_cast<int>(rng.range(s.extent, kCanvas - 1 - s.extent));
    s.cy = static_cast<int>(rng.range(s.extent, kCanvas - 1 - s.extent));
    for (int ch = 0; ch < 3; ++ch) {
      const int base = kColorBase[static_cast<int>(s.color)][ch];
      const int v = base + static_cast<int>(rng.range(-kColorJitter, kColorJitter));
      s.rgb[ch] = static_cast<std::uint8_t>(std::min(255, std::max(0, v)));
    }

    const bool left = spec_is_left(s);
    if (con.has_left && left != con.left) continue;
    if (con.forbid_rule_breakers && violates_hidden_rule(s, left)) continue;

    ImageLabel lab;
    lab.spec = s;
    lab.is_left = left;
    lab.class_index = class_index(s);
    return lab;
  }
  throw std::runtime_error("sample_shape: constraints unsatisfiable");
}

}  // namespace aan
