#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gripsense/collision.hpp"
#include "gripsense/imaging.hpp"
#include "gripsense/world.hpp"

namespace gripsense::sim {

/// Fingertip circle radius at a given bend fraction (linear between the open
/// and fully bent radii).
double tip_radius_mm(double bend, const geometry::GripperRig& rig);

struct CloseTarget {
    double bend = 1.0;
    bool seizes_object = false;
};

/// Bend fraction a close command should aim for. Closing onto an object whose
/// flank lies between the open and fully-bent tip circles stops there and
/// seizes it; otherwise the fingers bend fully.
CloseTarget close_target(const WorldState& world, const geometry::GripperRig& rig);

/// Rest pixel positions of the three markers (no displacement): each marker
/// rides its finger at the rig's polar angle, projected through the rig with
/// distortion. With the default rig at Open, the three columns sit at equal
/// radius from the frame center at 0/120/240 degrees.
collision::PositionMatrix marker_rest_positions(const WorldState& world,
                                                const geometry::GripperRig& rig,
                                                const ComplianceModel& compliance);

/// Recompute the derived render-ready state (marker/object pixels, contact
/// displacements, force sample) from the authoritative fields. Pure function
/// of the state; called by step() and once at world construction.
void refresh_derived(WorldState& world, const SimParams& params,
                     const geometry::GripperRig& rig);

/// Advance the world by exactly one tick: execute the active move, ramp the
/// finger bend, latch a pending grasp, drag a grasped object along, then
/// refresh the derived state. Fully deterministic given the world's seed.
WorldState step(WorldState world, const SimParams& params, const geometry::GripperRig& rig);

/// Owns a WorldState and drives it tick by tick, recording the 2000 Hz force
/// trace and serving captures on the 20 fps grid. Single simulation thread;
/// consumers read immutable snapshots.
class Engine {
public:
    Engine(WorldState initial, SimParams params, geometry::GripperRig rig,
           imaging::RenderConfig render);

    const WorldState& world() const { return world_; }
    const SimParams& params() const { return params_; }
    const geometry::GripperRig& rig() const { return rig_; }
    const imaging::RenderConfig& render_config() const { return render_; }

    double time_s() const { return world_.time_s; }
    double dt_s() const { return params_.dt_s; }

    /// One tick; appends the new force sample to the trace.
    void step();

    /// Frame for the current instant if one is due on the capture grid.
    /// Call before step() so the first frame sees the t = 0 state.
    std::optional<imaging::FrameBuffer> maybe_capture();

    void command_move(const Eigen::Vector3d& delta_mm);
    void command_move(const Eigen::Vector3d& delta_mm, double speed_mm_s);
    bool move_active() const { return world_.move.has_value(); }
    bool move_completed_this_tick() const { return world_.move_completed_this_tick; }

    void command_fingers(FingerState state);
    bool bend_settled() const;

    const std::vector<ForceSample>& force_trace() const { return force_trace_; }
    std::uint64_t frames_captured() const { return clock_.frame_index; }

    /// Observer for every frame leaving the camera, e.g. a PGM dumper.
    void set_frame_sink(std::function<void(const imaging::FrameBuffer&)> sink) {
        frame_sink_ = std::move(sink);
    }

    /// Disturbance events with negative start times are relative; pin them
    /// to t0 (start = t0 + |start|). Used when events should follow the
    /// grasp, whose duration the scenario author cannot know up front.
    void rebase_relative_disturbances(double t0_s);

private:
    WorldState world_;
    SimParams params_;
    geometry::GripperRig rig_;
    imaging::RenderConfig render_;
    imaging::CameraClock clock_;
    std::vector<ForceSample> force_trace_;
    std::function<void(const imaging::FrameBuffer&)> frame_sink_;
};

}  // namespace gripsense::sim
