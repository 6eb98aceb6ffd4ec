#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gripsense/geometry.hpp"

namespace gripsense::sim {
struct WorldState;
}

namespace gripsense::imaging {

/// Grayscale raster from the eye-in-palm camera. Immutable after capture;
/// safe to hand to read-only consumers while the simulation keeps stepping.
struct FrameBuffer {
    int width = geometry::kFrameWidth;
    int height = geometry::kFrameHeight;
    std::vector<std::uint8_t> pixels;  // row-major, width * height
    double timestamp = 0.0;            // simulation clock, seconds

    static FrameBuffer filled(std::uint8_t intensity, double timestamp = 0.0);

    std::uint8_t at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
    std::uint8_t& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
    bool contains(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
};

/// Render intensity levels. Spaced at least 64 apart so a single threshold
/// separates markers from everything else.
struct Intensities {
    std::uint8_t background = 32;
    std::uint8_t object_fill = 96;
    std::uint8_t object_rim = 192;
    std::uint8_t marker = 255;
};

/// An ID-tagged square blob standing in for a fingertip fiducial. The id is
/// encoded in which 2 px corners are notched out; the patterns are chosen so
/// the intensity-weighted centroid stays on the square center:
///   id 1 -> notches at top-left + bottom-right
///   id 2 -> notches at top-right + bottom-left
///   id 3 -> notches at all four corners
struct MarkerSprite {
    int id = 1;                    // in {1, 2, 3}
    geometry::PixelPoint center;   // fractional; rasterized to the nearest px
    int side_px = 15;              // >= 8 so centroiding is well-posed
    std::uint8_t intensity = 255;
};

struct RenderConfig {
    Intensities intensities;
    int marker_side_px = 15;
};

/// 20 fps capture grid. Capture instants are exact multiples of the period
/// from epoch; the index representation keeps the grid drift-free.
struct CameraClock {
    double rate_hz = 20.0;
    std::uint64_t frame_index = 0;

    double period_s() const { return 1.0 / rate_hz; }
    double next_capture_s() const { return static_cast<double>(frame_index) * period_s(); }
};

// Raster primitives. Tests also use these directly to synthesize frames.

/// Filled disk with a rim_px-wide bright rim just inside the radius.
void draw_disk(FrameBuffer& frame, double cu, double cv, double radius_px,
               std::uint8_t fill, std::uint8_t rim, int rim_px = 2);

/// Draw a marker square; notched corners are left untouched so they show
/// whatever lies underneath.
void draw_marker(FrameBuffer& frame, const MarkerSprite& sprite);

/// Seeded per-pixel additive Gaussian noise, clamped to [0, 255].
void add_gaussian_noise(FrameBuffer& frame, double sigma, std::uint64_t seed);

/// Deterministic render of the world's current pixel state: background, the
/// object disk (fill + 2 px rim), and the three marker sprites. Markers that
/// are occluded or would not fit fully inside the frame are skipped; their
/// ids are reported so callers can treat them as undetected this frame.
struct RenderResult {
    FrameBuffer frame;
    std::vector<int> skipped_marker_ids;
};

RenderResult render(const sim::WorldState& world, const RenderConfig& config);

/// Emit a frame exactly when now crosses the clock's next capture instant
/// (1 ns tolerance for tick arithmetic); advances the grid by one period.
/// The frame timestamp is the grid instant, not now.
std::optional<FrameBuffer> capture_if_due(CameraClock& clock, double now_s,
                                          const sim::WorldState& world,
                                          const RenderConfig& config);

// Binary portable graymap (P5) I/O for frame dumps and the detect CLI.
void write_pgm(const FrameBuffer& frame, const std::filesystem::path& path);
FrameBuffer read_pgm(const std::filesystem::path& path);

}  // namespace gripsense::imaging
