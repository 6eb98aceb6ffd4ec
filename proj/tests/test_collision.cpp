#include <doctest.h>

#include <cmath>

#include "gripsense/collision.hpp"
#include "gripsense/util.hpp"

using namespace gripsense;
using collision::CollisionMonitor;
using collision::CollisionThreshold;
using collision::CollisionVector;
using collision::PositionMatrix;

namespace {

PositionMatrix rest_matrix(double t = 0.0) {
    PositionMatrix m;
    m.rows = {{{100.0, 400.0}, {50.0, 620.0}, {50.0, 180.0}}};
    m.timestamp = t;
    return m;
}

PositionMatrix displaced(const PositionMatrix& base, int row, double dy, double dx,
                         double t = 1.0) {
    PositionMatrix m = base;
    m.rows[row].y += dy;
    m.rows[row].x += dx;
    m.timestamp = t;
    return m;
}

}  // namespace

TEST_CASE("encode: no motion gives the zero vector") {
    const PositionMatrix ref = rest_matrix();
    const CollisionVector c = collision::encode(ref, rest_matrix(1.0));
    CHECK(c.dy == 0.0);
    CHECK(c.dx == 0.0);
    CHECK(c.r == 0.0);
    CHECK(c.theta_deg == 0.0);
    CHECK(c.timestamp == 1.0);
}

TEST_CASE("encode: 3-4-5 displacement on one marker") {
    const PositionMatrix ref = rest_matrix();
    const CollisionVector c = collision::encode(ref, displaced(ref, 0, 3.0, 4.0));
    CHECK(c.dy == doctest::Approx(3.0));
    CHECK(c.dx == doctest::Approx(4.0));
    CHECK(c.r == doctest::Approx(5.0));
    CHECK(c.theta_deg == doctest::Approx(collision::canonical_angle_deg(3.0, 4.0)));
}

TEST_CASE("encode sums the per-marker rows") {
    const PositionMatrix ref = rest_matrix();
    PositionMatrix cur = ref;
    cur.rows[0].y += 1.0;
    cur.rows[1].y += 2.0;
    cur.rows[2].y += -1.0;
    const CollisionVector c = collision::encode(ref, cur);
    CHECK(c.dy == doctest::Approx(2.0));
    CHECK(c.dx == doctest::Approx(0.0));
    CHECK(c.r == doctest::Approx(2.0));
}

TEST_CASE("to_polar: axis conventions and zero vector") {
    auto [r1, t1] = collision::to_polar(1.0, 0.0);
    CHECK(r1 == doctest::Approx(1.0));
    CHECK(t1 == doctest::Approx(0.0));
    auto [r2, t2] = collision::to_polar(0.0, 1.0);
    CHECK(r2 == doctest::Approx(1.0));
    CHECK(t2 == doctest::Approx(90.0));
    auto [r3, t3] = collision::to_polar(-1.0, 0.0);
    CHECK(t3 == doctest::Approx(180.0));
    auto [r4, t4] = collision::to_polar(0.0, -1.0);
    CHECK(t4 == doctest::Approx(270.0));
    auto [r0, t0] = collision::to_polar(0.0, 0.0);
    CHECK(r0 == 0.0);
    CHECK(t0 == 0.0);
}

TEST_CASE("inward pushes on fingers at 0/120/240 encode to 180/300/60 degrees") {
    // Fingers rest at image-polar 0, 120, 240; an inward push moves the
    // marker opposite its rest direction.
    const PositionMatrix ref = rest_matrix();
    const std::array<double, 3> finger_polar{0.0, 120.0, 240.0};
    const std::array<double, 3> expected_theta{180.0, 300.0, 60.0};
    for (int i = 0; i < 3; ++i) {
        const double rad = util::deg_to_rad(finger_polar[i] + 180.0);
        const CollisionVector c =
            collision::encode(ref, displaced(ref, i, 10.0 * std::cos(rad), 10.0 * std::sin(rad)));
        CHECK(util::angle_difference_deg(c.theta_deg, expected_theta[i]) <= 1e-9);
        // Each vector sits 180 degrees from its finger's polar position.
        CHECK(util::angle_difference_deg(c.theta_deg, finger_polar[i] + 180.0) <= 1e-9);
    }
}

TEST_CASE("is_collision: boundary inclusive") {
    const CollisionThreshold th{6.0};
    CollisionVector c;
    c.r = 0.0;
    CHECK_FALSE(collision::is_collision(c, th));
    c.r = 5.99;
    CHECK_FALSE(collision::is_collision(c, th));
    c.r = 6.0;
    CHECK(collision::is_collision(c, th));
    c.r = 6.01;
    CHECK(collision::is_collision(c, th));
}

TEST_CASE("encode is linear: scaling displacements scales r, keeps theta") {
    const PositionMatrix ref = rest_matrix();
    for (std::uint64_t k = 0; k < 50; ++k) {
        const double dy = 10.0 * (util::uniform01(61, 2 * k) - 0.5);
        const double dx = 10.0 * (util::uniform01(61, 2 * k + 1) - 0.5);
        if (std::hypot(dy, dx) < 1e-6) continue;
        const CollisionVector base = collision::encode(ref, displaced(ref, 1, dy, dx));
        const CollisionVector scaled = collision::encode(ref, displaced(ref, 1, 3.0 * dy, 3.0 * dx));
        CHECK(scaled.r == doctest::Approx(3.0 * base.r).epsilon(1e-12));
        CHECK(util::angle_difference_deg(scaled.theta_deg, base.theta_deg) <= 1e-9);
    }
}

TEST_CASE("encode is rotation-equivariant in the displacement field") {
    const PositionMatrix ref = rest_matrix();
    for (std::uint64_t k = 0; k < 50; ++k) {
        const double dy = 10.0 * (util::uniform01(67, 3 * k) - 0.5);
        const double dx = 10.0 * (util::uniform01(67, 3 * k + 1) - 0.5);
        const double phi_deg = 360.0 * util::uniform01(67, 3 * k + 2);
        const double phi = util::deg_to_rad(phi_deg);
        PositionMatrix cur = ref;
        PositionMatrix rotated = ref;
        for (int i = 0; i < 3; ++i) {
            cur.rows[i].y += dy;
            cur.rows[i].x += dx;
            rotated.rows[i].y += dy * std::cos(phi) - dx * std::sin(phi);
            rotated.rows[i].x += dy * std::sin(phi) + dx * std::cos(phi);
        }
        const CollisionVector a = collision::encode(ref, cur);
        const CollisionVector b = collision::encode(ref, rotated);
        CHECK(b.r == doctest::Approx(a.r).epsilon(1e-9));
        if (a.r > 1e-6) {
            CHECK(util::angle_difference_deg(b.theta_deg, a.theta_deg + phi_deg) <= 1e-6);
        }
    }
}

TEST_CASE("monitor: holds its last decision on an incomplete frame, faults after three") {
    CollisionMonitor monitor;
    const PositionMatrix ref = rest_matrix();
    monitor.latch_reference(ref);
    const auto v1 = monitor.ingest(displaced(ref, 0, 2.0, 0.0, 1.0));
    REQUIRE(v1.has_value());
    CHECK(v1->r == doctest::Approx(2.0));

    const auto held1 = monitor.ingest(std::nullopt);
    REQUIRE(held1.has_value());
    CHECK(held1->r == doctest::Approx(2.0));  // held
    CHECK(monitor.incomplete_streak() == 1);
    CHECK_FALSE(monitor.marker_fault());

    (void)monitor.ingest(std::nullopt);
    CHECK_FALSE(monitor.marker_fault());
    (void)monitor.ingest(std::nullopt);
    CHECK(monitor.marker_fault());
}

TEST_CASE("monitor: complete frame resets the incomplete streak") {
    CollisionMonitor monitor;
    const PositionMatrix ref = rest_matrix();
    monitor.latch_reference(ref);
    (void)monitor.ingest(std::nullopt);
    (void)monitor.ingest(std::nullopt);
    (void)monitor.ingest(rest_matrix(2.0));
    CHECK(monitor.incomplete_streak() == 0);
    (void)monitor.ingest(std::nullopt);
    (void)monitor.ingest(std::nullopt);
    CHECK_FALSE(monitor.marker_fault());
}

TEST_CASE("monitor: re-latching zeroes the vector against the new reference") {
    CollisionMonitor monitor;
    const PositionMatrix ref = rest_matrix();
    monitor.latch_reference(ref);
    const PositionMatrix moved = displaced(ref, 2, 8.0, -3.0, 1.0);
    const auto v = monitor.ingest(moved);
    REQUIRE(v.has_value());
    CHECK(v->r > 6.0);
    monitor.latch_reference(moved);
    const auto v2 = monitor.ingest(displaced(ref, 2, 8.0, -3.0, 2.0));
    REQUIRE(v2.has_value());
    CHECK(v2->r == doctest::Approx(0.0));
}

TEST_CASE("monitor without a reference yields nothing") {
    CollisionMonitor monitor;
    CHECK_FALSE(monitor.has_reference());
    CHECK_FALSE(monitor.ingest(rest_matrix()).has_value());
}
