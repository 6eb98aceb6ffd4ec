#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gripsense/detect.hpp"
#include "gripsense/harness.hpp"
#include "gripsense/mechanics.hpp"
#include "gripsense/scenario.hpp"

namespace {

using gripsense::scenario::ScenarioConfig;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFault = 2;

int cmd_run(const std::string& scenario_path, const gripsense::harness::RunOptions& options) {
    const ScenarioConfig config = ScenarioConfig::load_file(scenario_path);
    const gripsense::harness::RunResult result = gripsense::harness::run_scenario(config, options);

    if (!options.trace_path) std::cout << result.trace_ndjson;

    ordered_json summary;
    summary["final_phase"] = gripsense::control::to_string(result.outcome.final_phase);
    summary["fault"] = gripsense::control::to_string(result.outcome.fault);
    summary["contact_depth_estimate_mm"] = result.outcome.contact_depth_estimate_mm;
    summary["descend_iterations"] = result.outcome.descend_iterations;
    summary["dodges"] = result.dodges;
    summary["post_grasp_fault"] = gripsense::control::to_string(result.post_grasp_fault);
    summary["scenario_hash"] = config.source_hash;
    summary["seed"] = config.seed;
    std::cerr << summary.dump(2) << "\n";

    const bool faulted = !result.outcome.done() ||
                         result.post_grasp_fault != gripsense::control::FaultReason::None;
    return faulted ? kExitFault : kExitOk;
}

int cmd_bench(const std::string& scenario_path, int trials, const std::string& out_dir) {
    const ScenarioConfig config = ScenarioConfig::load_file(scenario_path);
    const int n = trials > 0 ? trials : config.bench.trials;
    const gripsense::harness::LatencyReport report = gripsense::harness::bench_latency(config, n);
    gripsense::harness::emit_report(report, out_dir);
    std::cout << "art_ms=" << report.art_s * 1000.0 << " n=" << report.n
              << " excluded=" << report.excluded << " -> " << out_dir << "/report.json\n";
    return kExitOk;
}

int cmd_mechanics(double fx, double fy, bool two_finger) {
    const auto basis = two_finger ? gripsense::mechanics::FingerBasis::two_finger()
                                  : gripsense::mechanics::FingerBasis::three_finger();
    const auto decomposition = gripsense::mechanics::decompose({fx, fy}, basis);
    ordered_json j;
    j["fx"] = fx;
    j["fy"] = fy;
    j["basis"] = two_finger ? "two_finger" : "three_finger";
    j["coefficients"] = decomposition.coefficients;
    j["residual"] = {decomposition.residual.x(), decomposition.residual.y()};
    j["resistible"] = gripsense::mechanics::is_resistible({fx, fy}, basis, 1e-9);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_detect(const std::string& frame_path, double r_min, double r_max) {
    if (!std::filesystem::exists(frame_path)) {
        std::cerr << "detect: no such frame file: " << frame_path << "\n";
        return kExitUsage;
    }
    const gripsense::imaging::FrameBuffer frame = gripsense::imaging::read_pgm(frame_path);
    const auto extraction = gripsense::detect::extract_marker_centers(frame);
    for (const auto& obs : extraction.observations) {
        ordered_json j;
        j["type"] = "marker";
        j["id"] = obs.id;
        j["u"] = obs.centroid.u;
        j["v"] = obs.centroid.v;
        j["area_px"] = obs.area_px;
        std::cout << j.dump() << "\n";
    }
    for (int id : extraction.missing_ids) {
        ordered_json j;
        j["type"] = "missing_marker";
        j["id"] = id;
        std::cout << j.dump() << "\n";
    }
    for (const auto& circle : gripsense::detect::hough_circles(frame, r_min, r_max)) {
        ordered_json j;
        j["type"] = "circle";
        j["u"] = circle.center.u;
        j["v"] = circle.center.v;
        j["radius_px"] = circle.radius_px;
        j["score"] = circle.accumulator_score;
        std::cout << j.dump() << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gripsense: vision-based collision sensing simulator and toolkit"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "execute a grasp scenario with post-grasp monitoring");
    std::string run_scenario_path;
    std::string run_scenario_flag;
    std::string trace_path, polar_path, frames_dir;
    run->add_option("scenario_file", run_scenario_path, "scenario file");
    run->add_option("--scenario", run_scenario_flag, "scenario file (alternative to the positional)");
    run->add_option("--trace", trace_path, "write the NDJSON event trace here");
    run->add_option("--polar-csv", polar_path, "write (theta, r) rows for polar plotting");
    run->add_option("--dump-frames", frames_dir, "dump every captured frame as PGM");

    // bench-latency
    auto* bench = app.add_subcommand("bench-latency", "vision vs force response-time benchmark");
    std::string bench_scenario_path, bench_out;
    int bench_trials = 0;
    bench->add_option("--scenario", bench_scenario_path, "scenario file")->required();
    bench->add_option("--trials", bench_trials, "trial count (default from scenario)");
    bench->add_option("--out", bench_out, "output directory")->required();

    // mechanics
    auto* mech = app.add_subcommand("mechanics", "decompose a disturbance across the fingers");
    double fx = 0.0, fy = 0.0;
    bool two_finger = false;
    mech->add_option("--fx", fx, "disturbance x component")->required();
    mech->add_option("--fy", fy, "disturbance y component")->required();
    mech->add_flag("--two-finger", two_finger, "use the opposed two-finger model");

    // detect
    auto* det = app.add_subcommand("detect", "print detections for a PGM frame as NDJSON");
    std::string frame_path;
    double r_min = 40.0, r_max = 200.0;
    det->add_option("frame", frame_path, "input PGM frame")->required();
    det->add_option("--r-min", r_min, "Hough radius band lower bound, px");
    det->add_option("--r-max", r_max, "Hough radius band upper bound, px");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::string path = run_scenario_flag.empty() ? run_scenario_path : run_scenario_flag;
            if (path.empty()) {
                std::cerr << "run: a scenario file is required\n";
                return kExitUsage;
            }
            gripsense::harness::RunOptions options;
            if (!trace_path.empty()) options.trace_path = trace_path;
            if (!polar_path.empty()) options.polar_csv_path = polar_path;
            if (!frames_dir.empty()) options.dump_frames_dir = frames_dir;
            return cmd_run(path, options);
        }
        if (bench->parsed()) return cmd_bench(bench_scenario_path, bench_trials, bench_out);
        if (mech->parsed()) return cmd_mechanics(fx, fy, two_finger);
        if (det->parsed()) return cmd_detect(frame_path, r_min, r_max);
    } catch (const gripsense::scenario::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gripsense::harness::BenchError& e) {
        std::cerr << "bench error: " << e.what() << "\n";
        return kExitFault;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFault;
    }
    return kExitUsage;
}
