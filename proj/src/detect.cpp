#include "gripsense/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gripsense::detect {

namespace {

struct Component {
    double weight_sum = 0.0;
    double u_weighted = 0.0;
    double v_weighted = 0.0;
    int area = 0;
    int min_u = 1 << 30, max_u = -1;
    int min_v = 1 << 30, max_v = -1;
};

constexpr int kNotchPx = 2;

// Decode the corner-notch pattern from the component bounding box. A corner
// is notched when its 2x2 cell inside the box stays below threshold.
// {TL, BR} -> 1, {TR, BL} -> 2, all four -> 3.
int read_marker_id(const imaging::FrameBuffer& frame, const Component& c,
                   std::uint8_t threshold) {
    auto corner_dark = [&](int u0, int v0) {
        for (int dv = 0; dv < kNotchPx; ++dv) {
            for (int du = 0; du < kNotchPx; ++du) {
                const int u = u0 + du;
                const int v = v0 + dv;
                if (!frame.contains(u, v) || frame.at(u, v) >= threshold) return false;
            }
        }
        return true;
    };
    const bool tl = corner_dark(c.min_u, c.min_v);
    const bool tr = corner_dark(c.max_u - kNotchPx + 1, c.min_v);
    const bool br = corner_dark(c.max_u - kNotchPx + 1, c.max_v - kNotchPx + 1);
    const bool bl = corner_dark(c.min_u, c.max_v - kNotchPx + 1);
    if (tl && tr && br && bl) return 3;
    if (tl && br && !tr && !bl) return 1;
    if (tr && bl && !tl && !br) return 2;
    return 0;  // unrecognized pattern
}

}  // namespace

MarkerExtraction extract_marker_centers(const imaging::FrameBuffer& frame,
                                        const ExtractParams& params) {
    const int w = frame.width;
    const int h = frame.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Component> components;
    std::vector<int> stack;

    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * w + u;
            if (label[idx] != -1 || frame.pixels[idx] < params.intensity_threshold) continue;
            const int id = static_cast<int>(components.size());
            components.emplace_back();
            Component& comp = components.back();
            label[idx] = id;
            stack.push_back(static_cast<int>(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cu = cur % w;
                const int cv = cur / w;
                const double weight = frame.pixels[cur];
                comp.weight_sum += weight;
                comp.u_weighted += weight * cu;
                comp.v_weighted += weight * cv;
                comp.area += 1;
                comp.min_u = std::min(comp.min_u, cu);
                comp.max_u = std::max(comp.max_u, cu);
                comp.min_v = std::min(comp.min_v, cv);
                comp.max_v = std::max(comp.max_v, cv);
                for (int dv = -1; dv <= 1; ++dv) {
                    for (int du = -1; du <= 1; ++du) {
                        if (du == 0 && dv == 0) continue;
                        const int nu = cu + du;
                        const int nv = cv + dv;
                        if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
                        const std::size_t nidx = static_cast<std::size_t>(nv) * w + nu;
                        if (label[nidx] != -1 || frame.pixels[nidx] < params.intensity_threshold) continue;
                        label[nidx] = id;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
        }
    }

    // Keep the largest component per decoded id.
    std::map<int, std::pair<const Component*, int>> best;  // id -> (component, area)
    for (const Component& comp : components) {
        if (comp.area < params.min_area_px) continue;
        const int id = read_marker_id(frame, comp, params.intensity_threshold);
        if (id == 0) continue;
        auto it = best.find(id);
        if (it == best.end() || comp.area > it->second.second) {
            best[id] = {&comp, comp.area};
        }
    }

    MarkerExtraction out;
    for (int id : params.expected_ids) {
        auto it = best.find(id);
        if (it == best.end()) {
            out.missing_ids.push_back(id);
            continue;
        }
        const Component& comp = *it->second.first;
        MarkerObservation obs;
        obs.id = id;
        obs.centroid = {comp.u_weighted / comp.weight_sum, comp.v_weighted / comp.weight_sum};
        obs.frame_timestamp = frame.timestamp;
        obs.area_px = comp.area;
        out.observations.push_back(obs);
    }
    return out;
}

std::optional<collision::PositionMatrix> position_matrix_from(const MarkerExtraction& extraction) {
    if (!extraction.complete() || extraction.observations.size() != 3) return std::nullopt;
    collision::PositionMatrix m;
    for (const MarkerObservation& obs : extraction.observations) {
        if (obs.id < 1 || obs.id > 3) return std::nullopt;
        m.rows[obs.id - 1] = {obs.centroid.v, obs.centroid.u};
        m.timestamp = obs.frame_timestamp;
    }
    return m;
}

namespace {

struct Accumulator {
    int nbx, nby, nbr;
    std::vector<int> votes;

    int& at(int bx, int by, int br) {
        return votes[(static_cast<std::size_t>(br) * nby + by) * nbx + bx];
    }
    int at(int bx, int by, int br) const {
        return votes[(static_cast<std::size_t>(br) * nby + by) * nbx + bx];
    }
};

}  // namespace

std::vector<CircleDetection> hough_circles(const imaging::FrameBuffer& frame,
                                           const HoughParams& params) {
    if (!(params.r_min_px >= 4.0 && params.r_min_px < params.r_max_px && params.r_max_px <= 300.0)) {
        throw std::invalid_argument("hough_circles: need 4 <= r_min < r_max <= 300");
    }
    const int w = frame.width;
    const int h = frame.height;
    const int r_min = static_cast<int>(std::lround(params.r_min_px));
    const int r_max = static_cast<int>(std::lround(params.r_max_px));
    const int sb = params.spatial_bin_px;
    const int rb = params.radius_bin_px;

    // Sobel gradients; edge pixels vote along their gradient line in both
    // directions, once per candidate radius.
    struct Edge {
        int u, v;
        double gu, gv;  // unit gradient
    };
    std::vector<Edge> edges;
    for (int v = 1; v < h - 1; ++v) {
        for (int u = 1; u < w - 1; ++u) {
            const auto p = [&](int du, int dv) {
                return static_cast<double>(frame.at(u + du, v + dv));
            };
            const double gu = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) -
                              (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            const double gv = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) -
                              (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            const double mag = std::hypot(gu, gv);
            if (mag < params.edge_threshold) continue;
            edges.push_back({u, v, gu / mag, gv / mag});
        }
    }
    if (edges.empty()) return {};

    Accumulator acc;
    acc.nbx = (w + sb - 1) / sb;
    acc.nby = (h + sb - 1) / sb;
    acc.nbr = (r_max - r_min) / rb + 1;
    acc.votes.assign(static_cast<std::size_t>(acc.nbx) * acc.nby * acc.nbr, 0);

    for (const Edge& e : edges) {
        for (int r = r_min; r <= r_max; ++r) {
            const int br = (r - r_min) / rb;
            for (int sign = -1; sign <= 1; sign += 2) {
                const double cx = e.u + sign * r * e.gu;
                const double cy = e.v + sign * r * e.gv;
                if (cx < 0.0 || cx >= w || cy < 0.0 || cy >= h) continue;
                acc.at(static_cast<int>(cx) / sb, static_cast<int>(cy) / sb, br) += 1;
            }
        }
    }

    // Gradient quantization on a rasterized rim scatters votes across a few
    // neighboring spatial bins (about r * sin(angle error) pixels), so score
    // each bin over its 3x3 spatial window. That restores the perimeter as
    // the right scale for the vote threshold: 40 % of the smallest radius's
    // perimeter by default.
    Accumulator smoothed = acc;
    for (int br = 0; br < acc.nbr; ++br) {
        for (int by = 0; by < acc.nby; ++by) {
            for (int bx = 0; bx < acc.nbx; ++bx) {
                int sum = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nbx = bx + dx, nby = by + dy;
                        if (nbx < 0 || nbx >= acc.nbx || nby < 0 || nby >= acc.nby) continue;
                        sum += acc.at(nbx, nby, br);
                    }
                }
                smoothed.at(bx, by, br) = sum;
            }
        }
    }

    const int vote_threshold =
        std::max(1, static_cast<int>(params.vote_fraction * 2.0 * M_PI * r_min));

    struct Candidate {
        int bx, by, br, votes;
    };
    std::vector<Candidate> candidates;
    for (int br = 0; br < acc.nbr; ++br) {
        for (int by = 0; by < acc.nby; ++by) {
            for (int bx = 0; bx < acc.nbx; ++bx) {
                const int v = smoothed.at(bx, by, br);
                if (v < vote_threshold) continue;
                bool is_max = true;
                for (int dr = -1; dr <= 1 && is_max; ++dr) {
                    for (int dy = -1; dy <= 1 && is_max; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dr == 0 && dy == 0 && dx == 0) continue;
                            const int nbx = bx + dx, nby = by + dy, nbr = br + dr;
                            if (nbx < 0 || nbx >= acc.nbx || nby < 0 || nby >= acc.nby ||
                                nbr < 0 || nbr >= acc.nbr) continue;
                            if (smoothed.at(nbx, nby, nbr) > v) {
                                is_max = false;
                                break;
                            }
                        }
                    }
                }
                if (is_max) candidates.push_back({bx, by, br, v});
            }
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.br != b.br) return a.br < b.br;
        if (a.by != b.by) return a.by < b.by;
        return a.bx < b.bx;
    });

    // Refine each kept maximum over its 3x3x3 neighborhood and suppress
    // near-duplicates (plateaus and the inner-rim echo of the same disk).
    std::vector<CircleDetection> detections;
    for (const Candidate& c : candidates) {
        double wsum = 0.0, usum = 0.0, vsum = 0.0, rsum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nbx = c.bx + dx, nby = c.by + dy, nbr = c.br + dr;
                    if (nbx < 0 || nbx >= acc.nbx || nby < 0 || nby >= acc.nby ||
                        nbr < 0 || nbr >= acc.nbr) continue;
                    const double weight = acc.at(nbx, nby, nbr);
                    wsum += weight;
                    usum += weight * (nbx * sb + sb * 0.5);
                    vsum += weight * (nby * sb + sb * 0.5);
                    rsum += weight * (r_min + nbr * rb + rb * 0.5);
                }
            }
        }
        CircleDetection det;
        det.center = {usum / wsum, vsum / wsum};
        det.radius_px = rsum / wsum;
        det.accumulator_score = c.votes;
        // Sidelobes of a strong circle (shifted center, shifted or inscribed
        // radius) also clear the vote threshold; suppress candidates close to
        // or contained in an already kept, stronger circle.
        const bool duplicate = std::any_of(
            detections.begin(), detections.end(), [&](const CircleDetection& kept) {
                const double dc = std::hypot(kept.center.u - det.center.u,
                                             kept.center.v - det.center.v);
                const double scale = 0.5 * std::min(kept.radius_px, det.radius_px);
                const bool near = dc <= scale && std::fabs(kept.radius_px - det.radius_px) <= scale;
                const bool contained = dc + det.radius_px <= kept.radius_px + 2.0 * sb;
                return near || contained;
            });
        if (!duplicate) detections.push_back(det);
    }
    return detections;
}

}  // namespace gripsense::detect
