#include "gripsense/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gripsense/detect.hpp"
#include "gripsense/util.hpp"

namespace gripsense::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("short write: " + path.string());
}

}  // namespace

std::optional<double> detect_onset(const std::vector<TimedSample>& series,
                                   const OnsetDetector& detector) {
    if (series.empty()) return std::nullopt;
    double peak = 0.0;
    for (const TimedSample& s : series) peak = std::max(peak, s.value);
    if (peak <= 0.0) return std::nullopt;
    for (const TimedSample& s : series) {
        if (s.value / peak > detector.fraction) return s.t;
    }
    return std::nullopt;
}

namespace {

// One smash-and-retract cycle against the contact plane.
TrialRecord run_latency_trial(const scenario::ScenarioConfig& config, int index) {
    sim::WorldState world = config.make_world(/*start_closed=*/true);
    world.rng_seed = util::mix(config.seed, static_cast<std::uint64_t>(index));
    sim::Engine engine(std::move(world), config.sim, config.rig, config.render);

    const double down_mm = config.object.top_depth_mm + config.bench.peak_penetration_mm;
    collision::CollisionMonitor monitor;
    TrialRecord trial;
    trial.index = index;

    enum class Stage { Down, Hold, Up, Tail };
    Stage stage = Stage::Down;
    double stage_end = 0.0;
    engine.command_move(Eigen::Vector3d(0.0, 0.0, -down_mm), config.bench.speed_mm_s);

    constexpr double kTailS = 0.06;
    bool running = true;
    while (running) {
        if (auto frame = engine.maybe_capture()) {
            const auto matrix =
                detect::position_matrix_from(detect::extract_marker_centers(*frame));
            if (!monitor.has_reference()) {
                if (matrix) {
                    monitor.latch_reference(*matrix);
                    trial.vision_series.push_back({frame->timestamp, 0.0});
                    trial.vision_theta_deg.push_back(0.0);
                }
            } else if (const auto vector = monitor.ingest(matrix); vector && matrix) {
                trial.vision_series.push_back({frame->timestamp, vector->r});
                trial.vision_theta_deg.push_back(vector->theta_deg);
            }
        }
        switch (stage) {
            case Stage::Down:
                if (!engine.move_active()) {
                    stage = Stage::Hold;
                    stage_end = engine.time_s() + config.bench.hold_s;
                }
                break;
            case Stage::Hold:
                if (engine.time_s() >= stage_end) {
                    stage = Stage::Up;
                    engine.command_move(Eigen::Vector3d(0.0, 0.0, down_mm),
                                        config.bench.speed_mm_s);
                }
                break;
            case Stage::Up:
                if (!engine.move_active()) {
                    stage = Stage::Tail;
                    stage_end = engine.time_s() + kTailS;
                }
                break;
            case Stage::Tail:
                if (engine.time_s() >= stage_end) running = false;
                break;
        }
        if (running) engine.step();
    }

    trial.force_series.reserve(engine.force_trace().size());
    for (const sim::ForceSample& s : engine.force_trace()) {
        trial.force_series.push_back({s.t, s.fz});
    }

    const OnsetDetector force_detector{config.bench.onset_fraction,
                                       OnsetDetector::Channel::Force};
    const auto force_onset = detect_onset(trial.force_series, force_detector);

    // Vision channel onsets when the collision vector first crosses the
    // controller threshold; the timestamp is the frame tick plus the
    // configured processing delay.
    std::optional<double> vision_onset;
    for (const TimedSample& s : trial.vision_series) {
        if (s.value >= config.controller.threshold.value_px) {
            vision_onset = s.t + config.processing_delay_s;
            break;
        }
    }

    if (force_onset && vision_onset) {
        trial.valid = true;
        trial.force_onset_s = *force_onset;
        trial.vision_onset_s = *vision_onset;
        trial.latency_s = std::fabs(*vision_onset - *force_onset);
    }
    return trial;
}

}  // namespace

LatencyReport bench_latency(const scenario::ScenarioConfig& config, int trials) {
    if (trials < 3) throw BenchError("bench_latency: need at least 3 trials");
    LatencyReport report;
    report.processing_delay_s = config.processing_delay_s;
    report.onset_fraction = config.bench.onset_fraction;
    report.seed = config.seed;
    report.scenario_hash = config.source_hash;

    double latency_sum = 0.0;
    for (int i = 0; i < trials; ++i) {
        TrialRecord trial = run_latency_trial(config, i);
        if (trial.valid) {
            latency_sum += trial.latency_s;
            report.n += 1;
        } else {
            report.excluded += 1;
        }
        report.trials.push_back(std::move(trial));
    }
    if (report.excluded > 0) {
        if (report.excluded * 10 > trials) {
            throw BenchError("bench_latency: " + std::to_string(report.excluded) + " of " +
                             std::to_string(trials) + " trials had no onset");
        }
        report.warnings.push_back(std::to_string(report.excluded) +
                                  " trial(s) had no onset and were excluded");
    }
    if (report.n == 0) throw BenchError("bench_latency: no valid trials");
    report.art_s = latency_sum / report.n;
    return report;
}

namespace {

std::string series_csv(const std::vector<TimedSample>& series, const char* value_header) {
    double peak = 0.0;
    for (const TimedSample& s : series) peak = std::max(peak, s.value);
    std::string csv = std::string("t_s,") + value_header + ",normalized\n";
    for (const TimedSample& s : series) {
        csv += fmt_g(s.t);
        csv += ',';
        csv += fmt_g(s.value);
        csv += ',';
        csv += fmt_g(peak > 0.0 ? s.value / peak : 0.0);
        csv += '\n';
    }
    return csv;
}

}  // namespace

void emit_report(const LatencyReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    ordered_json j;
    j["art_ms"] = report.art_s * 1000.0;
    j["n"] = report.n;
    j["excluded"] = report.excluded;
    j["processing_delay_ms"] = report.processing_delay_s * 1000.0;
    j["onset_fraction"] = report.onset_fraction;
    j["seed"] = report.seed;
    j["scenario_hash"] = report.scenario_hash;
    j["onset_labeling_note"] =
        "art averages the absolute gap |t_force - t_vision|; the force channel "
        "leads on its 100x faster sampling grid";
    // Published context figures, for comparison only; the desk-scale
    // simulation reproduces the measurement structure, not hardware delays.
    j["reference_context"] = {{"hardware_art_ms", 204.75}, {"human_tactile_reaction_ms", 241.0}};
    ordered_json per_trial = ordered_json::array();
    for (const TrialRecord& t : report.trials) {
        ordered_json row;
        row["trial"] = t.index;
        row["valid"] = t.valid;
        row["force_onset_ms"] = t.force_onset_s * 1000.0;
        row["vision_onset_ms"] = t.vision_onset_s * 1000.0;
        row["latency_ms"] = t.latency_s * 1000.0;
        per_trial.push_back(row);
    }
    j["per_trial"] = per_trial;
    if (!report.warnings.empty()) j["warnings"] = report.warnings;
    write_text_file(out_dir / "report.json", j.dump(2) + "\n");

    for (const TrialRecord& t : report.trials) {
        char name[64];
        std::snprintf(name, sizeof(name), "trial_%03d_force.csv", t.index);
        write_text_file(out_dir / name, series_csv(t.force_series, "fz"));
        std::snprintf(name, sizeof(name), "trial_%03d_vision.csv", t.index);
        write_text_file(out_dir / name, series_csv(t.vision_series, "r_px"));
        std::snprintf(name, sizeof(name), "trial_%03d_polar.csv", t.index);
        std::string polar = "t_s,theta_deg,r_px\n";
        for (std::size_t k = 0; k < t.vision_series.size(); ++k) {
            polar += fmt_g(t.vision_series[k].t);
            polar += ',';
            polar += fmt_g(k < t.vision_theta_deg.size() ? t.vision_theta_deg[k] : 0.0);
            polar += ',';
            polar += fmt_g(t.vision_series[k].value);
            polar += '\n';
        }
        write_text_file(out_dir / name, polar);
    }
}

std::string trace_to_ndjson(const std::vector<control::TraceEvent>& events) {
    std::string out;
    for (const control::TraceEvent& event : events) {
        ordered_json j;
        if (const auto* v = std::get_if<control::VectorEvent>(&event)) {
            j["t"] = v->t;
            j["dy"] = v->vector.dy;
            j["dx"] = v->vector.dx;
            j["r"] = v->vector.r;
            j["theta"] = v->vector.theta_deg;
            j["collision"] = v->collision;
        } else if (const auto* p = std::get_if<control::PhaseEvent>(&event)) {
            j["t"] = p->t;
            j["event"] = "phase";
            j["phase"] = p->phase;
        } else if (const auto* m = std::get_if<control::MoveEvent>(&event)) {
            j["t"] = m->t;
            j["event"] = "move";
            j["purpose"] = m->purpose;
            j["delta_mm"] = {m->delta_mm.x(), m->delta_mm.y(), m->delta_mm.z()};
        } else if (const auto* g = std::get_if<control::GripperEvent>(&event)) {
            j["t"] = g->t;
            j["event"] = "gripper";
            j["state"] = g->state;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

struct MonitoringContext {
    sim::Engine& engine;
    collision::CollisionMonitor monitor;

    bool latch_reference() {
        for (int attempt = 0; attempt < collision::CollisionMonitor::kFaultAfterIncompleteFrames;
             ++attempt) {
            while (true) {
                if (auto frame = engine.maybe_capture()) {
                    const auto matrix =
                        detect::position_matrix_from(detect::extract_marker_centers(*frame));
                    if (matrix) {
                        monitor.latch_reference(*matrix);
                        return true;
                    }
                    break;  // incomplete frame, try the next one
                }
                engine.step();
            }
        }
        return false;
    }

    void run_move_unmonitored(const Eigen::Vector3d& delta) {
        engine.command_move(delta);
        while (engine.move_active()) {
            (void)engine.maybe_capture();
            engine.step();
        }
    }
};

}  // namespace

RunResult run_scenario(const scenario::ScenarioConfig& config, const RunOptions& options) {
    sim::Engine engine(config.make_world(), config.sim, config.rig, config.render);

    std::uint64_t frame_counter = 0;
    if (options.dump_frames_dir) {
        std::filesystem::create_directories(*options.dump_frames_dir);
        const std::filesystem::path dir = *options.dump_frames_dir;
        engine.set_frame_sink([dir, &frame_counter](const imaging::FrameBuffer& frame) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%05llu.pgm",
                          static_cast<unsigned long long>(frame_counter++));
            imaging::write_pgm(frame, dir / name);
        });
    }

    control::GraspController controller(config.controller);
    RunResult result;
    result.outcome = controller.run(engine);
    result.trace = std::move(result.outcome.trace);
    result.outcome.trace.clear();

    if (result.outcome.done()) {
        engine.rebase_relative_disturbances(engine.time_s());
        result.polar_csv = "t_s,theta_deg,r_px,collision\n";
        MonitoringContext ctx{engine, {}};
        if (!ctx.latch_reference()) {
            result.post_grasp_fault = control::FaultReason::MarkerLoss;
        } else {
            const double t_end = engine.time_s() + config.run_duration_s;
            while (engine.time_s() < t_end &&
                   result.post_grasp_fault == control::FaultReason::None) {
                if (auto frame = engine.maybe_capture()) {
                    const auto matrix =
                        detect::position_matrix_from(detect::extract_marker_centers(*frame));
                    const auto vector = ctx.monitor.ingest(matrix);
                    if (ctx.monitor.marker_fault()) {
                        result.post_grasp_fault = control::FaultReason::MarkerLoss;
                        break;
                    }
                    if (matrix && vector) {
                        const bool hit =
                            collision::is_collision(*vector, config.controller.threshold);
                        result.trace.push_back(control::VectorEvent{vector->timestamp, *vector, hit});
                        result.polar_csv += fmt_g(vector->timestamp) + "," +
                                            fmt_g(vector->theta_deg) + "," + fmt_g(vector->r) +
                                            "," + (hit ? "1" : "0") + "\n";
                        if (hit) {
                            const control::CartesianMove dodge = control::dodge_move(
                                *vector, config.controller, engine.world().gripper_pose,
                                engine.rig());
                            if (!dodge.is_zero()) {
                                result.trace.push_back(control::MoveEvent{
                                    engine.time_s(), dodge.delta_mm, "dodge"});
                                ctx.run_move_unmonitored(dodge.delta_mm);
                                result.dodges += 1;
                            }
                            // One dodge per event: absorb the displacement
                            // into a fresh reference before monitoring again.
                            if (!ctx.latch_reference()) {
                                result.post_grasp_fault = control::FaultReason::MarkerLoss;
                                break;
                            }
                        }
                    }
                }
                engine.step();
            }
        }
    }

    result.trace_ndjson = trace_to_ndjson(result.trace);
    if (options.trace_path) write_text_file(*options.trace_path, result.trace_ndjson);
    if (options.polar_csv_path) write_text_file(*options.polar_csv_path, result.polar_csv);
    return result;
}

}  // namespace gripsense::harness
