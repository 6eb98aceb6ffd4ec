#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "gripsense/collision.hpp"
#include "gripsense/control_events.hpp"
#include "gripsense/detect.hpp"
#include "gripsense/sim.hpp"

namespace gripsense::control {

/// Phases of the depth-free grasp. Transitions only run forward along this
/// order; Fault is reachable from anywhere.
enum class GraspPhase {
    Init,
    Align,
    CloseForProbe,
    Descend,
    PreGraspUp,
    OpenAtPreGrasp,
    DescendToGrasp,
    CloseToGrasp,
    Lift,
    Done,
    Fault,
};

std::string_view to_string(GraspPhase phase);

enum class FaultReason { None, NoCircle, MaxDescent, MarkerLoss };

std::string_view to_string(FaultReason reason);

struct ControllerConfig {
    collision::CollisionThreshold threshold{6.0};
    double z_step_mm = 5.0;        // per descend iteration
    double z_g_mm = 20.0;          // pre-grasp clearance
    double align_tol_px = 2.0;
    double dodge_gain_mm_per_px = 1.0;
    double dodge_deadband_px = 3.0;
    double max_descend_mm = 300.0;
    int max_align_iterations = 5;
    detect::HoughParams hough;
};

/// A commanded base-frame move, magnitude clamped to the safety limit.
struct CartesianMove {
    Eigen::Vector3d delta_mm = Eigen::Vector3d::Zero();

    static constexpr double kMaxMagnitudeMm = 50.0;

    static CartesianMove clamped(const Eigen::Vector3d& delta_mm) {
        const double norm = delta_mm.norm();
        if (norm <= kMaxMagnitudeMm) return CartesianMove{delta_mm};
        return CartesianMove{delta_mm * (kMaxMagnitudeMm / norm)};
    }

    bool is_zero() const { return delta_mm.isZero(0.0); }
};

/// Horizontal move that centers the detected circle: the pixel offset from
/// the principal point mapped to mm through the rig. Zero when already
/// within align_tol.
CartesianMove align_move(const detect::CircleDetection& detection,
                         const geometry::Transform& gripper_pose,
                         const geometry::GripperRig& rig,
                         double align_tol_px);

/// Escape move for a detected collision: dodge_gain * r millimeters along the
/// collision direction (moving with the push, away from the colliding body),
/// mapped from the image frame to the base frame through the rig. Zero below
/// the deadband; clamped to the safety limit.
CartesianMove dodge_move(const collision::CollisionVector& c,
                         const ControllerConfig& config,
                         const geometry::Transform& gripper_pose,
                         const geometry::GripperRig& rig);

struct GraspOutcome {
    GraspPhase final_phase = GraspPhase::Fault;
    FaultReason fault = FaultReason::None;
    double contact_depth_estimate_mm = 0.0;  // cumulative descent at collision
    double total_descent_mm = 0.0;
    int descend_iterations = 0;
    int phase_transitions = 0;
    std::vector<TraceEvent> trace;

    bool done() const { return final_phase == GraspPhase::Done; }
};

/// Runs the full depth-free grasp against a simulation engine:
/// observe (circle detection) -> align -> close -> descend by z_step until
/// the collision vector crosses threshold -> up z_g, open -> down z_g,
/// close -> lift by the total descent.
///
/// Collision monitoring pauses during commanded self-motion; the reference
/// matrix re-latches on the first frame after each completed move or gripper
/// state change. During the descend loop each new frame is evaluated against
/// the previous iteration's reference before re-latching, so contact shows up
/// as the per-step displacement increment.
class GraspController {
public:
    GraspController(ControllerConfig config) : config_(std::move(config)) {}

    GraspOutcome run(sim::Engine& engine);

    const ControllerConfig& config() const { return config_; }

private:
    ControllerConfig config_;
};

}  // namespace gripsense::control
