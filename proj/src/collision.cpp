#include "gripsense/collision.hpp"

namespace gripsense::collision {

CollisionVector encode(const PositionMatrix& reference, const PositionMatrix& current) {
    double dy = 0.0;
    double dx = 0.0;
    for (int i = 0; i < 3; ++i) {
        dy += current.rows[i].y - reference.rows[i].y;
        dx += current.rows[i].x - reference.rows[i].x;
    }
    CollisionVector c;
    c.dy = dy;
    c.dx = dx;
    const auto [r, theta] = to_polar(dy, dx);
    c.r = r;
    c.theta_deg = theta;
    c.timestamp = current.timestamp;
    return c;
}

}  // namespace gripsense::collision
