#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "gripsense/util.hpp"

namespace gripsense::collision {

/// One marker's pixel position, (y, x) ordered to match the collision-vector
/// components (y = row direction, x = column direction).
struct MarkerPosition {
    double y = 0.0;
    double x = 0.0;
};

/// Pixel positions of the three fingertip markers at one capture instant,
/// rows ordered by marker id. Construction requires all three markers, so a
/// PositionMatrix is complete by type.
struct PositionMatrix {
    std::array<MarkerPosition, 3> rows{};  // row i = marker id i+1
    double timestamp = 0.0;
};

/// Summed marker displacement against a latched reference, in Cartesian
/// (dy, dx) and polar (r, theta) forms.
struct CollisionVector {
    double dy = 0.0;        // px
    double dx = 0.0;        // px
    double r = 0.0;         // px
    double theta_deg = 0.0; // [0, 360); 0 when r is zero
    double timestamp = 0.0;
};

struct CollisionThreshold {
    double value_px = 6.0;  // strictly positive
};

/// Full-quadrant direction of (dy, dx): zero along +dy, increasing toward
/// +dx, normalized to [0, 360). Returns 0 for the zero vector.
///
/// Under this convention, with fingers at image angles 0/120/240, inward
/// pushes on fingers 1/2/3 encode to 180/300/60 degrees.
inline double canonical_angle_deg(double dy, double dx) {
    if (dy == 0.0 && dx == 0.0) return 0.0;
    return util::wrap_degrees(util::rad_to_deg(std::atan2(dx, dy)));
}

/// (magnitude, direction) of a displacement; (0, 0) maps to (0, 0 deg).
inline std::pair<double, double> to_polar(double dy, double dx) {
    return {std::hypot(dy, dx), canonical_angle_deg(dy, dx)};
}

/// Position encoder: the summed per-marker displacement between two complete
/// position matrices, with the polar form filled in.
CollisionVector encode(const PositionMatrix& reference, const PositionMatrix& current);

/// Boundary-inclusive threshold test.
inline bool is_collision(const CollisionVector& c, const CollisionThreshold& th) {
    return c.r >= th.value_px;
}

/// Accumulates the latest collision vector against a latched reference.
///
/// Single-writer (the frame consumer calls ingest) / single-reader (the
/// controller polls latest). Frames that miss a marker do not update the
/// vector; the previous decision holds, and three consecutive incomplete
/// frames raise a marker fault. Callers re-latch the reference whenever the
/// gripper changes state or completes a commanded move, since those
/// legitimately move markers.
class CollisionMonitor {
public:
    void latch_reference(const PositionMatrix& reference) {
        reference_ = reference;
        incomplete_streak_ = 0;
        fault_ = false;
    }

    /// Feed one frame's observation; std::nullopt means the frame was
    /// unusable (missing marker). Returns the vector used for this frame's
    /// decision, if any.
    std::optional<CollisionVector> ingest(const std::optional<PositionMatrix>& current) {
        if (!current.has_value()) {
            ++incomplete_streak_;
            if (incomplete_streak_ >= kFaultAfterIncompleteFrames) fault_ = true;
            return latest_;  // hold the last decision
        }
        incomplete_streak_ = 0;
        if (!reference_.has_value()) return std::nullopt;
        latest_ = encode(*reference_, *current);
        return latest_;
    }

    bool has_reference() const { return reference_.has_value(); }
    const std::optional<PositionMatrix>& reference() const { return reference_; }
    const std::optional<CollisionVector>& latest() const { return latest_; }
    int incomplete_streak() const { return incomplete_streak_; }
    bool marker_fault() const { return fault_; }

    void reset() { *this = CollisionMonitor{}; }

    static constexpr int kFaultAfterIncompleteFrames = 3;

private:
    std::optional<PositionMatrix> reference_;
    std::optional<CollisionVector> latest_;
    int incomplete_streak_ = 0;
    bool fault_ = false;
};

}  // namespace gripsense::collision
