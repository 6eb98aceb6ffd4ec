#include "gripsense/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "gripsense/util.hpp"
#include "gripsense/world.hpp"

namespace gripsense::imaging {

FrameBuffer FrameBuffer::filled(std::uint8_t intensity, double timestamp) {
    FrameBuffer f;
    f.pixels.assign(static_cast<std::size_t>(f.width) * f.height, intensity);
    f.timestamp = timestamp;
    return f;
}

void draw_disk(FrameBuffer& frame, double cu, double cv, double radius_px,
               std::uint8_t fill, std::uint8_t rim, int rim_px) {
    if (radius_px <= 0.0) return;
    const int u0 = std::max(0, static_cast<int>(std::floor(cu - radius_px)) - 1);
    const int u1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cu + radius_px)) + 1);
    const int v0 = std::max(0, static_cast<int>(std::floor(cv - radius_px)) - 1);
    const int v1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cv + radius_px)) + 1);
    const double r2 = radius_px * radius_px;
    const double inner = std::max(0.0, radius_px - rim_px);
    const double inner2 = inner * inner;
    for (int v = v0; v <= v1; ++v) {
        const double dv = v - cv;
        for (int u = u0; u <= u1; ++u) {
            const double du = u - cu;
            const double d2 = du * du + dv * dv;
            if (d2 > r2) continue;
            frame.at(u, v) = (d2 >= inner2) ? rim : fill;
        }
    }
}

namespace {

// Which 2 px corners are notched out, per marker id, indexed
// {top-left, top-right, bottom-right, bottom-left}. Patterns are point
// symmetric so the intensity-weighted centroid stays on the square center.
constexpr std::array<std::array<bool, 4>, 3> kNotchPatterns{{
    {true, false, true, false},   // id 1
    {false, true, false, true},   // id 2
    {true, true, true, true},     // id 3
}};

constexpr int kNotchPx = 2;

}  // namespace

void draw_marker(FrameBuffer& frame, const MarkerSprite& sprite) {
    const int side = sprite.side_px;
    const int cu = static_cast<int>(std::lround(sprite.center.u));
    const int cv = static_cast<int>(std::lround(sprite.center.v));
    const int half = side / 2;
    const int u0 = cu - half;
    const int v0 = cv - half;
    const auto& notches = kNotchPatterns[(sprite.id - 1) % 3];
    for (int dv = 0; dv < side; ++dv) {
        for (int du = 0; du < side; ++du) {
            const bool top = dv < kNotchPx;
            const bool bottom = dv >= side - kNotchPx;
            const bool left = du < kNotchPx;
            const bool right = du >= side - kNotchPx;
            if ((top && left && notches[0]) || (top && right && notches[1]) ||
                (bottom && right && notches[2]) || (bottom && left && notches[3])) {
                continue;  // notch: leave the underlying pixel
            }
            const int u = u0 + du;
            const int v = v0 + dv;
            if (frame.contains(u, v)) frame.at(u, v) = sprite.intensity;
        }
    }
}

void add_gaussian_noise(FrameBuffer& frame, double sigma, std::uint64_t seed) {
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        const double noisy = frame.pixels[i] + sigma * util::gaussian(seed, i);
        frame.pixels[i] = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
    }
}

namespace {

bool sprite_fits(const FrameBuffer& frame, const geometry::PixelPoint& center, int side) {
    const int cu = static_cast<int>(std::lround(center.u));
    const int cv = static_cast<int>(std::lround(center.v));
    const int half = side / 2;
    return cu - half >= 0 && cu - half + side <= frame.width &&
           cv - half >= 0 && cv - half + side <= frame.height;
}

}  // namespace

RenderResult render(const sim::WorldState& world, const RenderConfig& config) {
    RenderResult result;
    result.frame = FrameBuffer::filled(config.intensities.background, world.time_s);

    if (world.object.present) {
        // The displacement the contact model attributes to the object shows
        // up in the render too; object_disp_px is (y, x).
        draw_disk(result.frame,
                  world.object_px.u + world.object_disp_px[1],
                  world.object_px.v + world.object_disp_px[0],
                  world.object_radius_px,
                  config.intensities.object_fill, config.intensities.object_rim);
    }

    for (int i = 0; i < 3; ++i) {
        MarkerSprite sprite;
        sprite.id = i + 1;
        sprite.center = world.marker_px[i];
        sprite.side_px = config.marker_side_px;
        sprite.intensity = config.intensities.marker;
        if (!world.marker_visible[i] || !sprite_fits(result.frame, sprite.center, sprite.side_px)) {
            result.skipped_marker_ids.push_back(sprite.id);
            continue;
        }
        draw_marker(result.frame, sprite);
    }
    return result;
}

std::optional<FrameBuffer> capture_if_due(CameraClock& clock, double now_s,
                                          const sim::WorldState& world,
                                          const RenderConfig& config) {
    constexpr double kGridTolerance = 1e-9;
    if (now_s < clock.next_capture_s() - kGridTolerance) return std::nullopt;
    const double stamp = clock.next_capture_s();
    ++clock.frame_index;
    RenderResult r = render(world, config);
    r.frame.timestamp = stamp;
    return std::move(r.frame);
}

void write_pgm(const FrameBuffer& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
    if (!out) throw std::runtime_error("short write: " + path.string());
}

FrameBuffer read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path.string());
    auto next_int = [&in, &path]() {
        // Skip whitespace and # comment lines between header fields.
        int c = in.peek();
        while (c == '#' || std::isspace(c)) {
            if (c == '#') in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
            else in.get();
            c = in.peek();
        }
        long value = 0;
        if (!(in >> value)) throw std::runtime_error("bad PGM header: " + path.string());
        return value;
    };
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval: " + path.string());
    in.get();  // single whitespace byte before the raster
    FrameBuffer frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.pixels.resize(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(frame.pixels.size())) {
        throw std::runtime_error("truncated PGM raster: " + path.string());
    }
    return frame;
}

}  // namespace gripsense::imaging
