#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gripsense/control.hpp"
#include "gripsense/imaging.hpp"
#include "gripsense/sim.hpp"
#include "gripsense/world.hpp"

namespace gripsense::scenario {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ObjectSetup {
    bool present = true;
    double x_mm = 0.0;
    double y_mm = 0.0;
    double radius_mm = 60.0;
    double top_depth_mm = 40.0;  // object top below the start grasp plane
};

struct BenchParams {
    int trials = 20;
    double peak_penetration_mm = 5.0;  // descend past contact by this much
    double hold_s = 0.12;              // dwell at peak so the camera sees it
    double speed_mm_s = 500.0;         // smash speed
    double onset_fraction = 0.60;
};

/// Everything a run needs, loadable from a key-value scenario file with
/// nested tables. Defaults reproduce the reference gripper.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    double run_duration_s = 2.0;        // post-grasp monitoring window
    double processing_delay_s = 0.0;    // added to vision onset timestamps

    geometry::GripperRig rig;
    sim::SimParams sim;
    imaging::RenderConfig render;
    control::ControllerConfig controller;
    ObjectSetup object;
    BenchParams bench;
    std::vector<sim::DisturbanceEvent> disturbances;

    std::string source_hash = "defaults";

    static ScenarioConfig defaults() { return ScenarioConfig{}; }

    /// Parse scenario text. Unknown sections or keys are errors.
    static ScenarioConfig parse(std::string_view text);

    /// Load a scenario file; GRIPSENSE_SEED in the environment overrides the
    /// seed. The file's FNV-1a fingerprint lands in source_hash.
    static ScenarioConfig load_file(const std::filesystem::path& path);

    /// Initial world for this scenario. start_closed seeds the fingers fully
    /// bent and settled, as the latency bench requires.
    sim::WorldState make_world(bool start_closed = false) const;
};

}  // namespace gripsense::scenario
