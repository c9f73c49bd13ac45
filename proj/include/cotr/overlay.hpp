// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotr/timestamp.hpp"

namespace cotr {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major RGB24 raster.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("raster dimensions must be positive");
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
      pixels[i] = fill.r;
      pixels[i + 1] = fill.g;
      pixels[i + 2] = fill.b;
    }
  }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }

  void set(int x, int y, Rgb c) {
    const std::size_t i = index(x, y);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const {
    if (x < 0 || y < 0 || x >= width || y >= height) throw std::out_of_range("pixel outside raster");
    return (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// Embedded 5x7 font. One byte per row, top row first; bit 4 is the
// leftmost column.
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphSpacing = 1;

using GlyphRows = std::array<std::uint8_t, kGlyphHeight>;

inline constexpr std::array<GlyphRows, 11> kFont = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
    {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00},  // :
}};

inline const GlyphRows& glyph_for(char c) {
  if (c >= '0' && c <= '9') return kFont[static_cast<std::size_t>(c - '0')];
  if (c == ':') return kFont[10];
  throw std::invalid_argument(std::string("no glyph for character '") + c + "'");
}

struct OverlayConfig {
  std::optional<int> scale;  // unset: about 5% of frame height
  int margin_px = 4;
  Rgb foreground{255, 255, 255};
  std::optional<Rgb> background_box;

  int resolve_scale(int frame_height) const {
    if (scale) {
      if (*scale < 1) throw std::invalid_argument("overlay scale must be >= 1");
      return *scale;
    }
    return std::max(1, static_cast<int>(std::lround(0.05 * frame_height / kGlyphHeight)));
  }
};

struct LabelBox {
  int x = 0, y = 0, width = 0, height = 0;
};

/// Bounding box of the label, right-aligned against (width - margin, margin).
/// The background box, when enabled, pads the glyphs by one scaled pixel.
inline LabelBox label_box(std::string_view label, int frame_width, const OverlayConfig& cfg, int scale) {
  const int n = static_cast<int>(label.size());
  const int pad = cfg.background_box ? scale : 0;
  LabelBox box;
  box.width = n * kGlyphWidth * scale + std::max(0, n - 1) * kGlyphSpacing * scale + 2 * pad;
  box.height = kGlyphHeight * scale + 2 * pad;
  box.x = frame_width - cfg.margin_px - box.width;
  box.y = cfg.margin_px;
  return box;
}

/// Burns format_timestamp(t_seconds) into the top-right corner. Pixels
/// outside the label box are left untouched.
inline Raster render_timestamp(Raster frame, double t_seconds, const OverlayConfig& cfg) {
  if (cfg.margin_px < 0) throw std::invalid_argument("margin must be non-negative");
  const std::string label = format_timestamp(t_seconds);
  const int scale = cfg.resolve_scale(frame.height);
  const LabelBox box = label_box(label, frame.width, cfg, scale);
  const int need_w = box.width + 2 * cfg.margin_px;
  const int need_h = box.height + 2 * cfg.margin_px;
  if (frame.width < need_w || frame.height < need_h) {
    throw std::invalid_argument("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                                " too small for label '" + label + "'; need at least " + std::to_string(need_w) +
                                "x" + std::to_string(need_h));
  }

  if (cfg.background_box) {
    for (int y = box.y; y < box.y + box.height; ++y)
      for (int x = box.x; x < box.x + box.width; ++x) frame.set(x, y, *cfg.background_box);
  }

  const int pad = cfg.background_box ? scale : 0;
  int gx = box.x + pad;
  const int gy = box.y + pad;
  for (char c : label) {
    const GlyphRows& rows = glyph_for(c);
    for (int row = 0; row < kGlyphHeight; ++row) {
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (((rows[row] >> (kGlyphWidth - 1 - col)) & 1) == 0) continue;
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) frame.set(gx + col * scale + dx, gy + row * scale + dy, cfg.foreground);
      }
    }
    gx += (kGlyphWidth + kGlyphSpacing) * scale;
  }
  return frame;
}

struct ManifestEntry {
  long long frame_index = 0;
  std::string label;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One entry per frame index in [0, floor(duration_s * fps)).
inline std::vector<ManifestEntry> overlay_manifest(double duration_s, double fps) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw std::invalid_argument("duration must be positive");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw std::invalid_argument("fps must be positive");
  // Absorb products like 2.3 * 10 = 22.999999999999996.
  const auto count = static_cast<long long>(std::floor(duration_s * fps + 1e-9));
  std::vector<ManifestEntry> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) out.push_back({i, format_timestamp(static_cast<double>(i) / fps)});
  return out;
}

// Binary portable pixmap (P6, maxval 255).

inline Raster read_ppm(std::istream& in) {
  auto next_token = [&in]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) break;
      if (c == '#') {
        while (c != EOF && c != '\n') c = in.get();
        if (!tok.empty()) break;
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  };
  if (next_token() != "P6") throw std::runtime_error("not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PPM header");
  }
  if (maxval != 255) throw std::runtime_error("only 8-bit PPM is supported");
  Raster r(w, h);
  in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.pixels.size())) throw std::runtime_error("truncated PPM data");
  return r;
}

inline void write_ppm(std::ostream& out, const Raster& r) {
  out << "P6\n" << r.width << ' ' << r.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
}

inline Raster read_ppm_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return read_ppm(in);
}

inline void write_ppm_file(const std::filesystem::path& p, const Raster& r) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  write_ppm(out, r);
}

}  // namespace cotr
