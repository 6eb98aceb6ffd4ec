#include "gripsense/control.hpp"

#include <cmath>
#include <stdexcept>

#include "gripsense/util.hpp"

namespace gripsense::control {

std::string_view to_string(GraspPhase phase) {
    switch (phase) {
        case GraspPhase::Init: return "init";
        case GraspPhase::Align: return "align";
        case GraspPhase::CloseForProbe: return "close_for_probe";
        case GraspPhase::Descend: return "descend";
        case GraspPhase::PreGraspUp: return "pre_grasp_up";
        case GraspPhase::OpenAtPreGrasp: return "open_at_pre_grasp";
        case GraspPhase::DescendToGrasp: return "descend_to_grasp";
        case GraspPhase::CloseToGrasp: return "close_to_grasp";
        case GraspPhase::Lift: return "lift";
        case GraspPhase::Done: return "done";
        case GraspPhase::Fault: return "fault";
    }
    return "unknown";
}

std::string_view to_string(FaultReason reason) {
    switch (reason) {
        case FaultReason::None: return "none";
        case FaultReason::NoCircle: return "no_circle";
        case FaultReason::MaxDescent: return "max_descent";
        case FaultReason::MarkerLoss: return "marker_loss";
    }
    return "unknown";
}

CartesianMove align_move(const detect::CircleDetection& detection,
                         const geometry::Transform& gripper_pose,
                         const geometry::GripperRig& rig,
                         double align_tol_px) {
    const double du = detection.center.u - geometry::kPrincipalU;
    const double dv = detection.center.v - geometry::kPrincipalV;
    if (std::hypot(du, dv) <= align_tol_px) return CartesianMove{};
    const Eigen::Vector2d offset_mm =
        geometry::pixel_to_center(detection.center, rig.pixel_scale_mm);
    const Eigen::Vector3d delta =
        geometry::image_dir_to_base(offset_mm, gripper_pose, rig);
    return CartesianMove::clamped(delta);
}

CartesianMove dodge_move(const collision::CollisionVector& c,
                         const ControllerConfig& config,
                         const geometry::Transform& gripper_pose,
                         const geometry::GripperRig& rig) {
    if (c.r < config.dodge_deadband_px) return CartesianMove{};
    const double rad = util::deg_to_rad(c.theta_deg);
    // Image (x, y) direction of the collision vector; theta is zero along +y.
    const Eigen::Vector2d dir_image(std::sin(rad), std::cos(rad));
    const Eigen::Vector3d dir_base = geometry::image_dir_to_base(dir_image, gripper_pose, rig);
    return CartesianMove::clamped(config.dodge_gain_mm_per_px * c.r * dir_base);
}

namespace {

constexpr std::int64_t kMaxTicksPerWait = 600000;  // 5 simulated minutes

struct FrameData {
    imaging::FrameBuffer frame;
    std::optional<collision::PositionMatrix> matrix;
};

class RunContext {
public:
    RunContext(sim::Engine& engine, GraspOutcome& out) : engine_(engine), out_(out) {}

    void set_phase(GraspPhase phase) {
        if (!out_.trace.empty()) out_.phase_transitions += 1;
        out_.trace.push_back(PhaseEvent{engine_.time_s(), std::string(to_string(phase))});
    }

    GraspOutcome fault(FaultReason reason) {
        set_phase(GraspPhase::Fault);
        out_.final_phase = GraspPhase::Fault;
        out_.fault = reason;
        return std::move(out_);
    }

    /// Step until the next frame on the capture grid.
    FrameData next_frame() {
        for (std::int64_t guard = 0; guard < kMaxTicksPerWait; ++guard) {
            if (auto frame = engine_.maybe_capture()) {
                auto extraction = detect::extract_marker_centers(*frame);
                return FrameData{std::move(*frame), detect::position_matrix_from(extraction)};
            }
            engine_.step();
        }
        throw std::logic_error("camera produced no frame");
    }

    /// Run a move to completion. The camera keeps its cadence but frames go
    /// unmonitored: self-motion legitimately moves markers.
    void execute_move(const CartesianMove& move, std::string_view purpose) {
        out_.trace.push_back(MoveEvent{engine_.time_s(), move.delta_mm, std::string(purpose)});
        engine_.command_move(move.delta_mm);
        for (std::int64_t guard = 0; guard < kMaxTicksPerWait && engine_.move_active(); ++guard) {
            (void)engine_.maybe_capture();
            engine_.step();
        }
    }

    void set_fingers(sim::FingerState state) {
        out_.trace.push_back(GripperEvent{
            engine_.time_s(), state == sim::FingerState::Open ? "open" : "close"});
        engine_.command_fingers(state);
        for (std::int64_t guard = 0; guard < kMaxTicksPerWait && !engine_.bend_settled(); ++guard) {
            (void)engine_.maybe_capture();
            engine_.step();
        }
    }

    /// Latch the collision reference from the next complete frame; tolerates
    /// the same number of incomplete frames as the monitor before faulting.
    bool latch_reference() {
        for (int attempt = 0; attempt < collision::CollisionMonitor::kFaultAfterIncompleteFrames;
             ++attempt) {
            FrameData fd = next_frame();
            if (fd.matrix) {
                monitor_.latch_reference(*fd.matrix);
                return true;
            }
        }
        return false;
    }

    collision::CollisionMonitor& monitor() { return monitor_; }

    void trace_vector(const collision::CollisionVector& v, bool hit) {
        out_.trace.push_back(VectorEvent{v.timestamp, v, hit});
    }

private:
    sim::Engine& engine_;
    GraspOutcome& out_;
    collision::CollisionMonitor monitor_;
};

}  // namespace

GraspOutcome GraspController::run(sim::Engine& engine) {
    GraspOutcome out;
    RunContext ctx(engine, out);

    ctx.set_phase(GraspPhase::Init);
    ctx.set_fingers(sim::FingerState::Open);

    FrameData observed = ctx.next_frame();
    auto circles = detect::hough_circles(observed.frame, config_.hough);
    if (circles.empty()) return ctx.fault(FaultReason::NoCircle);
    detect::CircleDetection target = circles.front();

    ctx.set_phase(GraspPhase::Align);
    for (int iteration = 0; iteration < config_.max_align_iterations; ++iteration) {
        const CartesianMove move =
            align_move(target, engine.world().gripper_pose, engine.rig(), config_.align_tol_px);
        if (move.is_zero()) break;
        ctx.execute_move(move, "align");
        observed = ctx.next_frame();
        circles = detect::hough_circles(observed.frame, config_.hough);
        if (circles.empty()) return ctx.fault(FaultReason::NoCircle);
        target = circles.front();
    }

    ctx.set_phase(GraspPhase::CloseForProbe);
    ctx.set_fingers(sim::FingerState::Closed);
    if (!ctx.latch_reference()) return ctx.fault(FaultReason::MarkerLoss);

    ctx.set_phase(GraspPhase::Descend);
    double cumulative_mm = 0.0;
    bool collided = false;
    while (!collided) {
        if (cumulative_mm >= config_.max_descend_mm) return ctx.fault(FaultReason::MaxDescent);
        ctx.execute_move(CartesianMove{Eigen::Vector3d(0.0, 0.0, -config_.z_step_mm)}, "descend");
        out.descend_iterations += 1;
        cumulative_mm += config_.z_step_mm;

        // First frame after the move: evaluate against the reference latched
        // after the previous iteration, then re-latch if quiet.
        FrameData fd = ctx.next_frame();
        const auto vector = ctx.monitor().ingest(fd.matrix);
        if (ctx.monitor().marker_fault()) return ctx.fault(FaultReason::MarkerLoss);
        if (!fd.matrix || !vector) continue;  // hold last decision, keep reference
        const bool hit = collision::is_collision(*vector, config_.threshold);
        ctx.trace_vector(*vector, hit);
        if (hit) {
            collided = true;
            out.contact_depth_estimate_mm = cumulative_mm;
        } else {
            ctx.monitor().latch_reference(*fd.matrix);
        }
    }
    out.total_descent_mm = cumulative_mm;

    ctx.set_phase(GraspPhase::PreGraspUp);
    ctx.execute_move(CartesianMove{Eigen::Vector3d(0.0, 0.0, config_.z_g_mm)}, "pre_grasp_up");

    ctx.set_phase(GraspPhase::OpenAtPreGrasp);
    ctx.set_fingers(sim::FingerState::Open);

    ctx.set_phase(GraspPhase::DescendToGrasp);
    ctx.execute_move(CartesianMove{Eigen::Vector3d(0.0, 0.0, -config_.z_g_mm)}, "descend_to_grasp");

    ctx.set_phase(GraspPhase::CloseToGrasp);
    ctx.set_fingers(sim::FingerState::Closed);

    ctx.set_phase(GraspPhase::Lift);
    double remaining = cumulative_mm;
    while (remaining > 0.0) {
        const double chunk = std::min(remaining, CartesianMove::kMaxMagnitudeMm);
        ctx.execute_move(CartesianMove{Eigen::Vector3d(0.0, 0.0, chunk)}, "lift");
        remaining -= chunk;
    }

    ctx.set_phase(GraspPhase::Done);
    out.final_phase = GraspPhase::Done;
    return out;
}

}  // namespace gripsense::control
