#include "gripsense/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "gripsense/util.hpp"

namespace gripsense::scenario {

namespace {

using Value = std::variant<double, bool, std::string, std::vector<double>>;
using Table = std::map<std::string, Value>;

struct Document {
    Table root;
    std::map<std::string, Table> tables;
    std::vector<std::pair<std::string, Table>> array_tables;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Value parse_value(std::string_view raw, int line_no) {
    raw = trim(raw);
    if (raw.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') {
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        }
        return std::string(raw.substr(1, raw.size() - 2));
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '[') {
        if (raw.back() != ']') {
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
        }
        std::vector<double> values;
        std::string inner(raw.substr(1, raw.size() - 2));
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string_view t = trim(item);
            if (t.empty()) continue;
            char* end = nullptr;
            const double v = std::strtod(std::string(t).c_str(), &end);
            if (end == nullptr || *end != '\0') {
                throw ConfigError("line " + std::to_string(line_no) + ": bad array element '" +
                                  std::string(t) + "'");
            }
            values.push_back(v);
        }
        return values;
    }
    const std::string s(raw);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == nullptr || *end != '\0') {
        throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + s + "'");
    }
    return v;
}

Document parse_document(std::string_view text) {
    Document doc;
    Table* current = &doc.root;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip comments outside strings.
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.resize(i);
                break;
            }
        }
        const std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '[') {
            if (sv.size() >= 4 && sv[1] == '[' && sv.ends_with("]]")) {
                doc.array_tables.emplace_back(std::string(trim(sv.substr(2, sv.size() - 4))),
                                              Table{});
                current = &doc.array_tables.back().second;
            } else if (sv.ends_with("]")) {
                const std::string name(trim(sv.substr(1, sv.size() - 2)));
                current = &doc.tables[name];
            } else {
                throw ConfigError("line " + std::to_string(line_no) + ": bad table header");
            }
            continue;
        }
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(sv.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        (*current)[key] = parse_value(sv.substr(eq + 1), line_no);
    }
    return doc;
}

/// Tracks which keys a section consumed so leftovers can be reported.
class Section {
public:
    Section(std::string name, const Table* table) : name_(std::move(name)), table_(table) {}

    template <typename T>
    void get(const char* key, T& out) {
        if (table_ == nullptr) return;
        auto it = table_->find(key);
        if (it == table_->end()) return;
        consumed_.push_back(key);
        if constexpr (std::is_same_v<T, double>) {
            if (const double* v = std::get_if<double>(&it->second)) {
                out = *v;
                return;
            }
        } else if constexpr (std::is_same_v<T, int>) {
            if (const double* v = std::get_if<double>(&it->second)) {
                out = static_cast<int>(*v);
                return;
            }
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (const double* v = std::get_if<double>(&it->second)) {
                out = static_cast<std::uint64_t>(*v);
                return;
            }
        } else if constexpr (std::is_same_v<T, std::uint8_t>) {
            if (const double* v = std::get_if<double>(&it->second)) {
                out = static_cast<std::uint8_t>(*v);
                return;
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (const bool* v = std::get_if<bool>(&it->second)) {
                out = *v;
                return;
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (const std::string* v = std::get_if<std::string>(&it->second)) {
                out = *v;
                return;
            }
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (const std::vector<double>* v = std::get_if<std::vector<double>>(&it->second)) {
                out = *v;
                return;
            }
        }
        throw ConfigError(where() + " " + key + ": wrong value type");
    }

    void finish() const {
        if (table_ == nullptr) return;
        for (const auto& [key, value] : *table_) {
            if (std::find(consumed_.begin(), consumed_.end(), key) == consumed_.end()) {
                throw ConfigError(where() + " unknown key '" + key + "'");
            }
        }
    }

private:
    std::string where() const { return name_.empty() ? "top level" : "[" + name_ + "]"; }

    std::string name_;
    const Table* table_;
    std::vector<std::string> consumed_;
};

const Table* find_table(const Document& doc, const std::string& name) {
    auto it = doc.tables.find(name);
    return it == doc.tables.end() ? nullptr : &it->second;
}

sim::DisturbanceEvent parse_disturbance(const Table& table) {
    Section s("disturbance", &table);
    sim::DisturbanceEvent ev;
    std::string target = "object";
    s.get("target", target);
    if (target == "object") {
        ev.finger_id = 0;
    } else if (target.rfind("finger", 0) == 0 && target.size() == 7 &&
               target[6] >= '1' && target[6] <= '3') {
        ev.finger_id = target[6] - '0';
    } else {
        throw ConfigError("[[disturbance]] target must be finger1|finger2|finger3|object");
    }
    s.get("direction_deg", ev.direction_deg);
    s.get("magnitude", ev.magnitude);
    s.get("start_s", ev.start_s);
    s.get("duration_s", ev.duration_s);
    s.finish();
    if (ev.duration_s <= 0.0) throw ConfigError("[[disturbance]] duration_s must be > 0");
    if (ev.magnitude < 0.0) throw ConfigError("[[disturbance]] magnitude must be >= 0");
    return ev;
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(std::string_view text) {
    const Document doc = parse_document(text);
    ScenarioConfig cfg;

    {
        Section s("", &doc.root);
        s.get("seed", cfg.seed);
        s.get("run_duration_s", cfg.run_duration_s);
        s.finish();
    }
    {
        Section s("rig", find_table(doc, "rig"));
        s.get("pixel_scale_mm", cfg.rig.pixel_scale_mm);
        s.get("grasp_drop_mm", cfg.rig.grasp_drop_mm);
        s.get("camera_yaw_deg", cfg.rig.camera_yaw_deg);
        std::vector<double> offset;
        s.get("camera_offset_mm", offset);
        if (!offset.empty()) {
            if (offset.size() != 3) throw ConfigError("[rig] camera_offset_mm needs 3 elements");
            cfg.rig.camera_offset_mm = Eigen::Vector3d(offset[0], offset[1], offset[2]);
        }
        s.get("fingertip_spacing_mm", cfg.rig.fingertip_spacing_mm);
        s.get("finger_angle_deg", cfg.rig.finger_angle_deg);
        s.get("marker_offset_mm", cfg.rig.marker_offset_mm);
        s.get("closed_tip_radius_mm", cfg.rig.closed_tip_radius_mm);
        s.get("distortion_k", cfg.rig.distortion_k);
        s.finish();
        if (cfg.rig.pixel_scale_mm <= 0.0) throw ConfigError("[rig] pixel_scale_mm must be > 0");
    }
    {
        Section s("camera", find_table(doc, "camera"));
        s.get("processing_delay_s", cfg.processing_delay_s);
        s.get("marker_side_px", cfg.render.marker_side_px);
        s.finish();
        if (cfg.render.marker_side_px < 8) throw ConfigError("[camera] marker_side_px must be >= 8");
    }
    {
        Section s("intensities", find_table(doc, "intensities"));
        s.get("background", cfg.render.intensities.background);
        s.get("object_fill", cfg.render.intensities.object_fill);
        s.get("object_rim", cfg.render.intensities.object_rim);
        s.get("marker", cfg.render.intensities.marker);
        s.finish();
    }
    {
        Section s("object", find_table(doc, "object"));
        s.get("present", cfg.object.present);
        s.get("x_mm", cfg.object.x_mm);
        s.get("y_mm", cfg.object.y_mm);
        s.get("radius_mm", cfg.object.radius_mm);
        s.get("top_depth_mm", cfg.object.top_depth_mm);
        s.finish();
    }
    {
        Section s("sim", find_table(doc, "sim"));
        s.get("contact_stiffness_per_mm", cfg.sim.contact_stiffness_per_mm);
        s.get("compliance_gain_px_per_unit", cfg.sim.compliance.gain_px_per_unit);
        std::vector<double> share;
        s.get("contact_share", share);
        if (!share.empty()) {
            if (share.size() != 3) throw ConfigError("[sim] contact_share needs 3 elements");
            cfg.sim.contact_share = {share[0], share[1], share[2]};
        }
        s.get("force_noise_sigma", cfg.sim.force_noise_sigma);
        s.get("close_time_s", cfg.sim.close_time_s);
        s.get("move_speed_mm_s", cfg.sim.move_speed_mm_s);
        s.finish();
    }
    {
        Section s("detect", find_table(doc, "detect"));
        s.get("r_min_px", cfg.controller.hough.r_min_px);
        s.get("r_max_px", cfg.controller.hough.r_max_px);
        s.get("edge_threshold", cfg.controller.hough.edge_threshold);
        s.get("vote_fraction", cfg.controller.hough.vote_fraction);
        s.finish();
    }
    {
        Section s("controller", find_table(doc, "controller"));
        s.get("threshold_px", cfg.controller.threshold.value_px);
        s.get("z_step_mm", cfg.controller.z_step_mm);
        s.get("z_g_mm", cfg.controller.z_g_mm);
        s.get("align_tol_px", cfg.controller.align_tol_px);
        s.get("dodge_gain_mm_per_px", cfg.controller.dodge_gain_mm_per_px);
        s.get("dodge_deadband_px", cfg.controller.dodge_deadband_px);
        s.get("max_descend_mm", cfg.controller.max_descend_mm);
        s.finish();
        if (cfg.controller.threshold.value_px <= 0.0) {
            throw ConfigError("[controller] threshold_px must be > 0");
        }
        if (cfg.controller.align_tol_px < 1.0) {
            throw ConfigError("[controller] align_tol_px must be >= 1");
        }
        if (cfg.controller.z_step_mm <= 0.0 || cfg.controller.z_g_mm <= 0.0 ||
            cfg.controller.dodge_gain_mm_per_px <= 0.0 ||
            cfg.controller.dodge_deadband_px <= 0.0) {
            throw ConfigError("[controller] z_step_mm, z_g_mm, dodge_gain_mm_per_px and "
                              "dodge_deadband_px must be > 0");
        }
    }
    {
        Section s("bench", find_table(doc, "bench"));
        s.get("trials", cfg.bench.trials);
        s.get("peak_penetration_mm", cfg.bench.peak_penetration_mm);
        s.get("hold_s", cfg.bench.hold_s);
        s.get("speed_mm_s", cfg.bench.speed_mm_s);
        s.get("onset_fraction", cfg.bench.onset_fraction);
        s.finish();
        if (!(cfg.bench.onset_fraction > 0.0 && cfg.bench.onset_fraction < 1.0)) {
            throw ConfigError("[bench] onset_fraction must be in (0, 1)");
        }
    }
    for (const auto& [name, table] : doc.array_tables) {
        if (name != "disturbance") throw ConfigError("unknown array table [[" + name + "]]");
        cfg.disturbances.push_back(parse_disturbance(table));
    }
    for (const auto& [name, table] : doc.tables) {
        static const char* known[] = {"rig", "camera", "intensities", "object",
                                      "sim", "detect", "controller", "bench"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&name = name](const char* k) { return name == k; }) == std::end(known)) {
            throw ConfigError("unknown table [" + name + "]");
        }
    }

    std::ostringstream hash;
    hash << std::hex << util::fnv1a(text);
    cfg.source_hash = hash.str();
    return cfg;
}

ScenarioConfig ScenarioConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    ScenarioConfig cfg = parse(buffer.str());
    if (const char* env_seed = std::getenv("GRIPSENSE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env_seed, &end, 10);
        if (end == nullptr || *end != '\0') {
            throw ConfigError("GRIPSENSE_SEED must be an unsigned integer");
        }
        cfg.seed = v;
    }
    return cfg;
}

sim::WorldState ScenarioConfig::make_world(bool start_closed) const {
    sim::WorldState world;
    world.gripper_pose = geometry::Transform::identity();
    world.rng_seed = seed;
    if (start_closed) {
        world.finger_state = sim::FingerState::Closed;
        world.bend = {1.0, 1.0, 1.0};
        world.bend_target = 1.0;
    }
    world.object.present = object.present;
    world.object.xy_mm = Eigen::Vector2d(object.x_mm, object.y_mm);
    world.object.radius_mm = object.radius_mm;
    world.object.top_z_mm = world.grasp_center_z_mm(rig) - object.top_depth_mm;
    world.disturbances = disturbances;
    return world;
}

}  // namespace gripsense::scenario
