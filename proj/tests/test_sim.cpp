#include <doctest.h>

#include <cmath>

#include "gripsense/detect.hpp"
#include "gripsense/imaging.hpp"
#include "gripsense/scenario.hpp"
#include "gripsense/sim.hpp"
#include "gripsense/util.hpp"

using namespace gripsense;
using scenario::ScenarioConfig;
using sim::Engine;
using sim::FingerState;
using sim::WorldState;

namespace {

Engine make_engine(const ScenarioConfig& cfg, bool start_closed = false) {
    return Engine(cfg.make_world(start_closed), cfg.sim, cfg.rig, cfg.render);
}

}  // namespace

TEST_CASE("static world: markers at rest, force is pure noise") {
    ScenarioConfig cfg;
    cfg.object.present = false;
    Engine engine = make_engine(cfg);
    const auto rest = sim::marker_rest_positions(engine.world(), cfg.rig, cfg.sim.compliance);
    for (int k = 0; k < 400; ++k) engine.step();
    const auto rest_after = sim::marker_rest_positions(engine.world(), cfg.rig, cfg.sim.compliance);
    for (int i = 0; i < 3; ++i) {
        CHECK(engine.world().marker_disp_px[i].norm() == 0.0);
        CHECK(rest_after.rows[i].y == doctest::Approx(rest.rows[i].y));
        CHECK(rest_after.rows[i].x == doctest::Approx(rest.rows[i].x));
    }
    // |fz| < 3 sigma for at least 99 % of samples, and the mean is near zero.
    int within = 0;
    double sum = 0.0;
    const auto& trace = engine.force_trace();
    for (const auto& s : trace) {
        if (std::fabs(s.fz) < 3.0 * cfg.sim.force_noise_sigma) ++within;
        sum += s.fz;
    }
    CHECK(within >= static_cast<int>(0.99 * trace.size()));
    CHECK(std::fabs(sum / trace.size()) < 3.0 * cfg.sim.force_noise_sigma / std::sqrt(trace.size()));
}

TEST_CASE("descent at 0.5 m/s into a plane 10 mm down: contact force at 20 ms") {
    ScenarioConfig cfg;
    cfg.object.radius_mm = 1000.0;  // contact plane
    cfg.object.top_depth_mm = 10.0;
    Engine engine = make_engine(cfg, /*start_closed=*/true);
    engine.command_move(Eigen::Vector3d(0.0, 0.0, -15.0), 500.0);
    while (engine.move_active()) engine.step();
    const double sigma = cfg.sim.force_noise_sigma;
    double first_contact = -1.0;
    for (const auto& s : engine.force_trace()) {
        if (s.fz > 5.0 * sigma) {
            first_contact = s.t;
            break;
        }
    }
    REQUIRE(first_contact >= 0.0);
    CHECK(first_contact >= 0.02 - 1e-12);
    CHECK(first_contact <= 0.02 + cfg.sim.dt_s + 1e-12);
}

TEST_CASE("finger disturbance displaces its marker by gain * magnitude along the push") {
    ScenarioConfig cfg;
    cfg.object.present = false;
    cfg.disturbances.push_back({1, 180.0, 5.0, 0.01, 1.0});
    Engine engine = make_engine(cfg);
    while (engine.time_s() < 0.02) engine.step();
    const auto& disp = engine.world().marker_disp_px[0];
    const double expected = cfg.sim.compliance.gain_px_per_unit * 5.0;
    CHECK(disp[0] == doctest::Approx(-expected));  // y: toward the image center
    CHECK(disp[1] == doctest::Approx(0.0));
    CHECK(engine.world().marker_disp_px[1].norm() == 0.0);
    CHECK(engine.world().marker_disp_px[2].norm() == 0.0);
    // Inactive outside its window.
    while (engine.time_s() < 1.2) engine.step();
    CHECK(engine.world().marker_disp_px[0].norm() == 0.0);
}

TEST_CASE("compliance displacement is linear in the disturbance magnitude") {
    for (double magnitude : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        ScenarioConfig cfg;
        cfg.object.present = false;
        cfg.disturbances.push_back({2, 37.0, magnitude, 0.0, 1.0});
        sim::WorldState world = cfg.make_world();
        world.time_s = 0.0;
        sim::refresh_derived(world, cfg.sim, cfg.rig);
        const double slope = world.marker_disp_px[1].norm() / magnitude;
        CHECK(slope == doctest::Approx(cfg.sim.compliance.gain_px_per_unit).epsilon(1e-6));
    }
}

TEST_CASE("marker rest positions: open symmetry at 0/120/240 and equal radius") {
    ScenarioConfig cfg;
    const WorldState world = [&] {
        WorldState w = cfg.make_world();
        sim::refresh_derived(w, cfg.sim, cfg.rig);
        return w;
    }();
    const auto rest = sim::marker_rest_positions(world, cfg.rig, cfg.sim.compliance);
    std::array<double, 3> radius{}, angle{};
    for (int i = 0; i < 3; ++i) {
        const double dy = rest.rows[i].y - 300.0;
        const double dx = rest.rows[i].x - 400.0;
        radius[i] = std::hypot(dy, dx);
        angle[i] = collision::canonical_angle_deg(dy, dx);
    }
    CHECK(radius[1] == doctest::Approx(radius[0]).epsilon(1e-9));
    CHECK(radius[2] == doctest::Approx(radius[0]).epsilon(1e-9));
    CHECK(util::angle_difference_deg(angle[0], 0.0) <= 0.1);
    CHECK(util::angle_difference_deg(angle[1], 120.0) <= 0.1);
    CHECK(util::angle_difference_deg(angle[2], 240.0) <= 0.1);
}

TEST_CASE("closed rest radius shrinks; half bend lands midway") {
    ScenarioConfig cfg;
    WorldState world = cfg.make_world();
    sim::refresh_derived(world, cfg.sim, cfg.rig);
    auto radius_at = [&](double bend) {
        WorldState w = world;
        w.bend = {bend, bend, bend};
        const auto rest = sim::marker_rest_positions(w, cfg.rig, cfg.sim.compliance);
        return std::hypot(rest.rows[0].y - 300.0, rest.rows[0].x - 400.0);
    };
    const double open_r = radius_at(0.0);
    const double closed_r = radius_at(1.0);
    const double mid_r = radius_at(0.5);
    CHECK(closed_r < open_r);
    CHECK(std::fabs(mid_r - 0.5 * (open_r + closed_r)) <= 1.0);
    // Angles unchanged by closing.
    WorldState closed = world;
    closed.bend = {1.0, 1.0, 1.0};
    const auto rest = sim::marker_rest_positions(closed, cfg.rig, cfg.sim.compliance);
    CHECK(util::angle_difference_deg(
              collision::canonical_angle_deg(rest.rows[1].y - 300.0, rest.rows[1].x - 400.0),
              120.0) <= 0.1);
}

TEST_CASE("force channel: exactly 100 samples per camera frame") {
    ScenarioConfig cfg;
    cfg.object.present = false;
    Engine engine = make_engine(cfg);
    std::uint64_t frames = 0;
    const std::size_t force_before = engine.force_trace().size();
    // One simulated second: [0, 1). The t = 0 sample exists already.
    for (int k = 0; k < 2000; ++k) {
        if (engine.maybe_capture()) ++frames;
        engine.step();
    }
    const std::size_t force_samples = engine.force_trace().size() - force_before + 1;
    CHECK(frames == 20);
    CHECK(force_samples == 2001);  // samples at ticks 0..2000 inclusive
    CHECK((force_samples - 1) / frames == 100);
    CHECK(engine.frames_captured() == frames);
}

TEST_CASE("object push displaces all markers coherently along the push direction") {
    ScenarioConfig cfg;
    cfg.object.present = true;
    WorldState world = cfg.make_world();
    // Pretend the grasp already happened.
    world.object.grasped = true;
    world.finger_state = FingerState::Closed;
    world.bend = {0.6, 0.6, 0.6};
    world.bend_target = 0.6;
    world.disturbances.push_back({0, 123.0, 4.0, 0.0, 1.0});
    world.time_s = 0.0;
    sim::refresh_derived(world, cfg.sim, cfg.rig);
    const double rad = util::deg_to_rad(123.0);
    const Eigen::Vector2d expected =
        cfg.sim.compliance.gain_px_per_unit * 4.0 * Eigen::Vector2d(std::cos(rad), std::sin(rad));
    for (int i = 0; i < 3; ++i) {
        CHECK(world.marker_disp_px[i][0] == doctest::Approx(expected[0]));
        CHECK(world.marker_disp_px[i][1] == doctest::Approx(expected[1]));
    }
    CHECK(world.object_disp_px[0] == doctest::Approx(expected[0]));
    // Without the grasp the object cannot drag the fingers.
    WorldState loose = world;
    loose.object.grasped = false;
    sim::refresh_derived(loose, cfg.sim, cfg.rig);
    CHECK(loose.marker_disp_px[0].norm() == doctest::Approx(0.0));
}

TEST_CASE("doubling the disturbance doubles r through the rendered pipeline") {
    auto measure_r = [](double magnitude) {
        ScenarioConfig cfg;
        cfg.object.present = false;
        sim::WorldState world = cfg.make_world();
        sim::refresh_derived(world, cfg.sim, cfg.rig);
        const auto reference = detect::position_matrix_from(
            detect::extract_marker_centers(imaging::render(world, cfg.render).frame));
        world.disturbances.push_back({1, 212.0, magnitude, 0.0, 1.0});
        sim::refresh_derived(world, cfg.sim, cfg.rig);
        const auto current = detect::position_matrix_from(
            detect::extract_marker_centers(imaging::render(world, cfg.render).frame));
        REQUIRE(reference.has_value());
        REQUIRE(current.has_value());
        return collision::encode(*reference, *current).r;
    };
    const double r1 = measure_r(5.0);
    const double r2 = measure_r(10.0);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("determinism: same seed, same force trace and pixel state") {
    ScenarioConfig cfg;
    cfg.object.top_depth_mm = 30.0;
    auto run_once = [&]() {
        Engine engine = make_engine(cfg, true);
        engine.command_move(Eigen::Vector3d(0.0, 0.0, -35.0), 500.0);
        std::vector<std::uint8_t> last_pixels;
        while (engine.time_s() < 0.2) {
            if (auto f = engine.maybe_capture()) last_pixels = f->pixels;
            engine.step();
        }
        return std::make_pair(engine.force_trace(), last_pixels);
    };
    const auto a = run_once();
    const auto b = run_once();
    REQUIRE(a.first.size() == b.first.size());
    for (std::size_t i = 0; i < a.first.size(); ++i) {
        CHECK(a.first[i].t == b.first[i].t);
        CHECK(a.first[i].fz == b.first[i].fz);
    }
    CHECK(a.second == b.second);
    // Different seed, different noise.
    ScenarioConfig other = cfg;
    other.seed = 77;
    Engine engine = make_engine(other, true);
    engine.step();
    CHECK(engine.force_trace().back().fz != a.first[1].fz);
}

TEST_CASE("moves complete exactly and report completion") {
    ScenarioConfig cfg;
    cfg.object.present = false;
    Engine engine = make_engine(cfg);
    const double z0 = engine.world().gripper_pose.translation().z();
    engine.command_move(Eigen::Vector3d(0.0, 0.0, -5.0));
    int completions = 0;
    while (engine.move_active()) {
        engine.step();
        if (engine.move_completed_this_tick()) ++completions;
    }
    CHECK(completions == 1);
    CHECK(engine.world().gripper_pose.translation().z() == doctest::Approx(z0 - 5.0).epsilon(1e-12));
}

TEST_CASE("close onto an object stops at the flank and seizes it") {
    ScenarioConfig cfg;
    cfg.object.radius_mm = 60.0;
    cfg.object.top_depth_mm = 40.0;
    WorldState world = cfg.make_world(true);
    world.bend = {0.0, 0.0, 0.0};
    world.bend_target = 0.0;
    world.finger_state = FingerState::Open;
    // Put the grasp plane 3 mm below the object top, as after a probe.
    world.gripper_pose = geometry::Transform::translate(0.0, 0.0, -43.0);
    Engine engine(world, cfg.sim, cfg.rig, cfg.render);
    engine.command_fingers(FingerState::Closed);
    while (!engine.bend_settled()) engine.step();
    engine.step();
    const double open_r = cfg.rig.open_tip_radius_mm();
    const double expected_bend =
        (open_r - 60.0) / (open_r - cfg.rig.closed_tip_radius_mm);
    CHECK(engine.world().bend[0] == doctest::Approx(expected_bend).epsilon(1e-9));
    CHECK(engine.world().object.grasped);
    CHECK(sim::tip_radius_mm(engine.world().bend[0], cfg.rig) == doctest::Approx(60.0));
    // A grasped object rides along with the gripper.
    const double top_before = engine.world().object.top_z_mm;
    engine.command_move(Eigen::Vector3d(0.0, 0.0, 25.0));
    while (engine.move_active()) engine.step();
    CHECK(engine.world().object.top_z_mm == doctest::Approx(top_before + 25.0));
}
