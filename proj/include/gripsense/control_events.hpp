#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "gripsense/collision.hpp"

namespace gripsense::control {

// Structured trace events; the harness serializes them to NDJSON.

struct PhaseEvent {
    double t = 0.0;
    std::string phase;
};

struct MoveEvent {
    double t = 0.0;
    Eigen::Vector3d delta_mm = Eigen::Vector3d::Zero();
    std::string purpose;  // "align", "descend", "pre_grasp_up", ...
};

struct VectorEvent {
    double t = 0.0;
    collision::CollisionVector vector;
    bool collision = false;
};

struct GripperEvent {
    double t = 0.0;
    std::string state;  // "open" / "close"
};

using TraceEvent = std::variant<PhaseEvent, MoveEvent, VectorEvent, GripperEvent>;

}  // namespace gripsense::control
