#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gripsense/control.hpp"
#include "gripsense/scenario.hpp"
#include "gripsense/sim.hpp"

namespace gripsense::harness {

struct TimedSample {
    double t = 0.0;
    double value = 0.0;
};

struct OnsetDetector {
    double fraction = 0.60;  // of the series peak, in (0, 1)
    enum class Channel { Force, Vision } channel = Channel::Force;
};

/// Time of the first sample strictly exceeding fraction * peak. Normalizing
/// by the peak makes the rule scale-invariant, which is what lets it shrug
/// off sensor noise without losing sensitivity. std::nullopt when the series
/// is empty or has no positive peak.
std::optional<double> detect_onset(const std::vector<TimedSample>& series,
                                   const OnsetDetector& detector);

struct TrialRecord {
    int index = 0;
    bool valid = false;
    double force_onset_s = 0.0;
    double vision_onset_s = 0.0;  // frame tick + processing delay
    double latency_s = 0.0;       // |force onset - vision onset|
    std::vector<TimedSample> force_series;   // (t, fz), 2000 Hz
    std::vector<TimedSample> vision_series;  // (t, r), 20 fps
    std::vector<double> vision_theta_deg;    // parallel to vision_series
};

struct LatencyReport {
    double art_s = 0.0;  // mean absolute onset gap across valid trials
    int n = 0;
    int excluded = 0;
    double processing_delay_s = 0.0;
    double onset_fraction = 0.60;
    std::uint64_t seed = 0;
    std::string scenario_hash;
    std::vector<TrialRecord> trials;
    std::vector<std::string> warnings;
};

struct BenchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Smash-into-plane latency benchmark: per trial the closed gripper descends
/// at the bench speed until peak penetration, dwells, retracts. The force
/// channel onsets by the fraction-of-peak rule; the vision channel onsets at
/// the first frame whose collision vector crosses the controller threshold,
/// stamped at the frame tick plus the configured processing delay.
/// Trials with no onset are dropped; more than 10 % dropped is a BenchError.
LatencyReport bench_latency(const scenario::ScenarioConfig& config, int trials);

/// Write report.json plus per-trial normalized force/vision CSV traces.
void emit_report(const LatencyReport& report, const std::filesystem::path& out_dir);

struct RunOptions {
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> polar_csv_path;
    std::optional<std::filesystem::path> dump_frames_dir;
};

struct RunResult {
    control::GraspOutcome outcome;
    std::vector<control::TraceEvent> trace;  // grasp + post-grasp monitoring
    std::string trace_ndjson;
    std::string polar_csv;
    int dodges = 0;
    control::FaultReason post_grasp_fault = control::FaultReason::None;
};

/// Execute the scenario: run the grasp, then monitor for collisions for
/// run_duration_s, dodging along each detected collision vector (one dodge
/// per event, reference re-latched afterwards). Disturbances with negative
/// start times are rebased relative to the start of post-grasp monitoring.
RunResult run_scenario(const scenario::ScenarioConfig& config, const RunOptions& options = {});

std::string trace_to_ndjson(const std::vector<control::TraceEvent>& events);

}  // namespace gripsense::harness
