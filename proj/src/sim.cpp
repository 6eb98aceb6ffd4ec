#include "gripsense/sim.hpp"

#include <algorithm>
#include <cmath>

#include "gripsense/util.hpp"

namespace gripsense::sim {

namespace {

// Domain separation for the force-noise stream.
constexpr std::uint64_t kForceNoiseStream = 0xF04CE;

// Image-polar direction as an (y, x) pair: [0] = y component (rows),
// [1] = x component (columns). Zero degrees points along +y.
Eigen::Vector2d polar_dir_yx(double angle_deg) {
    const double rad = util::deg_to_rad(angle_deg);
    return Eigen::Vector2d(std::cos(rad), std::sin(rad));
}

// Marker position in the base frame for one finger at a given bend.
Eigen::Vector3d marker_world_mm(const WorldState& world, const geometry::GripperRig& rig,
                                const ComplianceModel& compliance, int finger_index) {
    const double radius =
        rig.marker_circle_radius_mm(tip_radius_mm(world.bend[finger_index], rig));
    const Eigen::Vector2d dir = polar_dir_yx(compliance.finger_polar_deg[finger_index]);
    // Image (y, x) maps to camera axes (x_cam along +u, y_cam along +v).
    const Eigen::Vector3d p_cam(radius * dir[1], radius * dir[0], -rig.grasp_drop_mm);
    const geometry::Transform t_base_cam = geometry::compose(world.gripper_pose, rig.t_a_b());
    return t_base_cam.apply(p_cam);
}

Eigen::Vector2d tip_xy_mm(const WorldState& world, const geometry::GripperRig& rig,
                          const ComplianceModel& compliance, int finger_index) {
    const double radius = tip_radius_mm(world.bend[finger_index], rig);
    const Eigen::Vector2d dir = polar_dir_yx(compliance.finger_polar_deg[finger_index]);
    const Eigen::Vector3d base =
        geometry::image_dir_to_base(Eigen::Vector2d(dir[1], dir[0]), world.gripper_pose, rig);
    return world.grasp_axis_xy_mm(rig) + radius * Eigen::Vector2d(base.x(), base.y());
}

}  // namespace

double tip_radius_mm(double bend, const geometry::GripperRig& rig) {
    const double open_r = rig.open_tip_radius_mm();
    return open_r - bend * (open_r - rig.closed_tip_radius_mm);
}

CloseTarget close_target(const WorldState& world, const geometry::GripperRig& rig) {
    CloseTarget t;
    if (!world.object.present || world.object.grasped) return t;
    if (world.grasp_center_z_mm(rig) > world.object.top_z_mm) return t;  // tips above the object
    const double open_r = rig.open_tip_radius_mm();
    const double closed_r = rig.closed_tip_radius_mm;
    const double b = (open_r - world.object.radius_mm) / (open_r - closed_r);
    if (b <= 0.0 || b >= 1.0) return t;  // flank outside the reachable band
    t.bend = b;
    t.seizes_object = true;
    return t;
}

collision::PositionMatrix marker_rest_positions(const WorldState& world,
                                                const geometry::GripperRig& rig,
                                                const ComplianceModel& compliance) {
    collision::PositionMatrix m;
    for (int i = 0; i < 3; ++i) {
        const geometry::PixelPoint px = geometry::project_to_pixel(
            marker_world_mm(world, rig, compliance, i), world.gripper_pose, rig);
        m.rows[i] = {px.v, px.u};
    }
    m.timestamp = world.time_s;
    return m;
}

void refresh_derived(WorldState& world, const SimParams& params,
                     const geometry::GripperRig& rig) {
    const ComplianceModel& compliance = params.compliance;
    const double t = world.time_s;

    // Vertical contact: penetration of the fingertip plane into the object
    // top while the object is not yet held.
    double contact_force = 0.0;
    std::array<bool, 3> contacting{false, false, false};
    if (world.object.present && !world.object.grasped) {
        const double penetration = world.object.top_z_mm - world.grasp_center_z_mm(rig);
        if (penetration > 0.0) {
            bool any = false;
            for (int i = 0; i < 3; ++i) {
                const double dist =
                    (tip_xy_mm(world, rig, compliance, i) - world.object.xy_mm).norm();
                contacting[i] = dist <= world.object.radius_mm;
                any = any || contacting[i];
            }
            if (any) contact_force = params.contact_stiffness_per_mm * penetration;
        }
    }

    double share_sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (contacting[i]) share_sum += params.contact_share[i];
    }

    for (auto& d : world.marker_disp_px) d.setZero();
    world.object_disp_px.setZero();

    if (contact_force > 0.0 && share_sum > 0.0) {
        for (int i = 0; i < 3; ++i) {
            if (!contacting[i]) continue;
            const double share = params.contact_share[i] / share_sum;
            // Pressed fingertips ride up toward the camera; their markers
            // drift radially outward in the image.
            world.marker_disp_px[i] += compliance.gain_px_per_unit * share * contact_force *
                                       polar_dir_yx(compliance.finger_polar_deg[i]);
        }
    }

    for (const DisturbanceEvent& ev : world.disturbances) {
        if (!ev.active_at(t) || ev.magnitude <= 0.0) continue;
        const Eigen::Vector2d push = compliance.gain_px_per_unit * ev.magnitude *
                                     polar_dir_yx(ev.direction_deg);
        if (ev.targets_object()) {
            if (!world.object.grasped) continue;
            // The held object drags all three fingertips coherently.
            for (auto& d : world.marker_disp_px) d += push;
            world.object_disp_px += push;
        } else if (ev.finger_id >= 1 && ev.finger_id <= 3) {
            world.marker_disp_px[ev.finger_id - 1] += push;
        }
    }

    const collision::PositionMatrix rest = marker_rest_positions(world, rig, compliance);
    for (int i = 0; i < 3; ++i) {
        world.marker_px[i] = {rest.rows[i].x + world.marker_disp_px[i][1],
                              rest.rows[i].y + world.marker_disp_px[i][0]};
    }

    if (world.object.present) {
        const Eigen::Vector3d obj(world.object.xy_mm.x(), world.object.xy_mm.y(),
                                  world.object.top_z_mm);
        world.object_px = geometry::project_to_pixel(obj, world.gripper_pose, rig);
        world.object_radius_px = world.object.radius_mm / rig.pixel_scale_mm;
    }

    world.fz = contact_force +
               params.force_noise_sigma *
                   util::gaussian(util::mix(world.rng_seed, kForceNoiseStream),
                                  static_cast<std::uint64_t>(world.tick));
}

WorldState step(WorldState world, const SimParams& params, const geometry::GripperRig& rig) {
    world.tick += 1;
    world.time_s = static_cast<double>(world.tick) * params.dt_s;
    world.move_completed_this_tick = false;

    if (world.move.has_value()) {
        MoveCommand& move = *world.move;
        world.gripper_pose = geometry::Transform(
            world.gripper_pose.rotation(), world.gripper_pose.translation() + move.per_tick_mm);
        move.done_ticks += 1;
        if (move.finished()) {
            world.move.reset();
            world.move_completed_this_tick = true;
        }
    }

    const double bend_step = params.dt_s / params.close_time_s;
    bool settled = true;
    for (double& b : world.bend) {
        if (b < world.bend_target) {
            b = std::min(b + bend_step, world.bend_target);
        } else if (b > world.bend_target) {
            b = std::max(b - bend_step, world.bend_target);
        }
        settled = settled && b == world.bend_target;
    }

    if (settled && world.grasp_on_close && world.finger_state == FingerState::Closed &&
        !world.object.grasped) {
        world.object.grasped = true;
        world.grasp_on_close = false;
        world.object.grab_offset_mm = world.object.xy_mm - world.grasp_axis_xy_mm(rig);
        world.object.grab_top_offset_mm = world.object.top_z_mm - world.grasp_center_z_mm(rig);
    }

    if (world.object.grasped) {
        world.object.xy_mm = world.grasp_axis_xy_mm(rig) + world.object.grab_offset_mm;
        world.object.top_z_mm = world.grasp_center_z_mm(rig) + world.object.grab_top_offset_mm;
    }

    refresh_derived(world, params, rig);
    return world;
}

MoveCommand MoveCommand::plan(const Eigen::Vector3d& delta_mm, double speed_mm_s, double dt_s) {
    MoveCommand m;
    m.delta_mm = delta_mm;
    const double dist = delta_mm.norm();
    m.total_ticks = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(dist / (speed_mm_s * dt_s))));
    m.per_tick_mm = delta_mm / static_cast<double>(m.total_ticks);
    return m;
}

Engine::Engine(WorldState initial, SimParams params, geometry::GripperRig rig,
               imaging::RenderConfig render)
    : world_(std::move(initial)),
      params_(params),
      rig_(rig),
      render_(render) {
    world_.time_s = static_cast<double>(world_.tick) * params_.dt_s;
    refresh_derived(world_, params_, rig_);
    force_trace_.push_back({world_.time_s, world_.fz});
}

void Engine::step() {
    world_ = sim::step(std::move(world_), params_, rig_);
    force_trace_.push_back({world_.time_s, world_.fz});
}

std::optional<imaging::FrameBuffer> Engine::maybe_capture() {
    auto frame = imaging::capture_if_due(clock_, world_.time_s, world_, render_);
    if (frame && frame_sink_) frame_sink_(*frame);
    return frame;
}

void Engine::rebase_relative_disturbances(double t0_s) {
    for (DisturbanceEvent& ev : world_.disturbances) {
        if (ev.start_s < 0.0) ev.start_s = t0_s - ev.start_s;
    }
}

void Engine::command_move(const Eigen::Vector3d& delta_mm) {
    command_move(delta_mm, params_.move_speed_mm_s);
}

void Engine::command_move(const Eigen::Vector3d& delta_mm, double speed_mm_s) {
    world_.move = MoveCommand::plan(delta_mm, speed_mm_s, params_.dt_s);
}

void Engine::command_fingers(FingerState state) {
    world_.finger_state = state;
    if (state == FingerState::Open) {
        world_.bend_target = 0.0;
        world_.grasp_on_close = false;
    } else {
        const CloseTarget target = close_target(world_, rig_);
        world_.bend_target = target.bend;
        world_.grasp_on_close = target.seizes_object;
    }
}

bool Engine::bend_settled() const {
    return std::all_of(world_.bend.begin(), world_.bend.end(),
                       [&](double b) { return b == world_.bend_target; });
}

}  // namespace gripsense::sim
