#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "gripsense/geometry.hpp"

namespace gripsense::sim {

enum class FingerState { Open, Closed };

/// Scripted external contact: a push on one finger or on the grasped object.
/// direction_deg is the image-polar direction the contact shoves things
/// along (zero toward +y/rows, increasing toward +x/columns), so an inward
/// poke on finger 1 (which rests at image angle 0) has direction 180.
struct DisturbanceEvent {
    int finger_id = 0;          // 1..3, or 0 for the grasped object
    double direction_deg = 0.0;
    double magnitude = 0.0;     // force units, >= 0
    double start_s = 0.0;
    double duration_s = 0.0;    // > 0

    bool targets_object() const { return finger_id == 0; }
    bool active_at(double t_s) const { return t_s >= start_s && t_s < start_s + duration_s; }
};

/// One z-force reading from the simulated high-rate force/torque channel.
struct ForceSample {
    double t = 0.0;   // seconds; samples are spaced exactly one tick apart
    double fz = 0.0;  // force units
};

/// Linear map from contact force to marker pixel displacement, plus the
/// image-polar angles the fingers rest at.
struct ComplianceModel {
    double gain_px_per_unit = 2.0;
    std::array<double, 3> finger_polar_deg{0.0, 120.0, 240.0};
};

/// Fixed simulation constants. dt is locked to the 2000 Hz force channel;
/// the camera samples every 100th tick.
struct SimParams {
    double dt_s = 0.0005;
    double contact_stiffness_per_mm = 10.0;  // k_c, force units per mm penetration
    ComplianceModel compliance;

    // How vertical contact force splits across the fingers. Slightly uneven
    // by default: the first-contact finger takes a larger share, which is
    // what makes symmetric descent contact visible to the summed marker
    // displacement at all. Renormalized over whichever fingers touch.
    std::array<double, 3> contact_share{0.4, 0.3, 0.3};

    double force_noise_sigma = 0.05;  // additive, on every force sample
    double close_time_s = 0.3;        // linear bend ramp duration
    double move_speed_mm_s = 100.0;   // commanded Cartesian move speed
};

struct ObjectState {
    bool present = false;
    Eigen::Vector2d xy_mm = Eigen::Vector2d::Zero();  // base frame
    double top_z_mm = 0.0;                            // base frame
    double radius_mm = 60.0;
    bool grasped = false;
    Eigen::Vector2d grab_offset_mm = Eigen::Vector2d::Zero();
    double grab_top_offset_mm = 0.0;
};

/// A commanded Cartesian move executed over a whole number of ticks so the
/// end pose is reached exactly.
struct MoveCommand {
    Eigen::Vector3d delta_mm = Eigen::Vector3d::Zero();
    std::int64_t total_ticks = 0;
    std::int64_t done_ticks = 0;
    Eigen::Vector3d per_tick_mm = Eigen::Vector3d::Zero();

    static MoveCommand plan(const Eigen::Vector3d& delta_mm, double speed_mm_s, double dt_s);
    bool finished() const { return done_ticks >= total_ticks; }
};

/// The whole simulated world at one tick. The stepper owns it exclusively;
/// consumers get immutable snapshots.
struct WorldState {
    geometry::Transform gripper_pose;  // base -> end-effector
    FingerState finger_state = FingerState::Open;
    std::array<double, 3> bend{0.0, 0.0, 0.0};  // 0 = straight, 1 = fully bent
    double bend_target = 0.0;
    bool grasp_on_close = false;  // set while a close is expected to seize the object

    ObjectState object;
    std::vector<DisturbanceEvent> disturbances;
    std::array<bool, 3> marker_visible{true, true, true};

    std::int64_t tick = 0;
    double time_s = 0.0;  // tick * dt, refreshed by step
    std::uint64_t rng_seed = 1;
    std::optional<MoveCommand> move;
    bool move_completed_this_tick = false;

    // Derived render-ready state, refreshed by step()/refresh_derived().
    std::array<geometry::PixelPoint, 3> marker_px{};     // rest + displacement, distorted
    std::array<Eigen::Vector2d, 3> marker_disp_px{};     // (y, x) per marker
    Eigen::Vector2d object_disp_px = Eigen::Vector2d::Zero();  // (y, x)
    geometry::PixelPoint object_px{};                    // projected object center
    double object_radius_px = 0.0;
    double fz = 0.0;  // latest force sample, noise included

    double grasp_center_z_mm(const geometry::GripperRig& rig) const {
        return geometry::compose(gripper_pose, rig.t_a_c()).translation().z();
    }
    Eigen::Vector2d grasp_axis_xy_mm(const geometry::GripperRig& rig) const {
        const Eigen::Vector3d t = geometry::compose(gripper_pose, rig.t_a_c()).translation();
        return Eigen::Vector2d(t.x(), t.y());
    }
};

}  // namespace gripsense::sim
