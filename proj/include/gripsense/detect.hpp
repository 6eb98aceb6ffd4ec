#pragma once

#include <optional>
#include <vector>

#include "gripsense/collision.hpp"
#include "gripsense/geometry.hpp"
#include "gripsense/imaging.hpp"

namespace gripsense::detect {

/// One marker's sub-pixel centroid in one frame.
struct MarkerObservation {
    int id = 0;
    geometry::PixelPoint centroid;
    double frame_timestamp = 0.0;
    double area_px = 0.0;
};

/// Extraction result: observations sorted by id, plus the ids that were not
/// found. A frame missing any expected id is unusable for collision encoding.
struct MarkerExtraction {
    std::vector<MarkerObservation> observations;
    std::vector<int> missing_ids;

    bool complete() const { return missing_ids.empty(); }
};

struct ExtractParams {
    std::uint8_t intensity_threshold = 200;
    int min_area_px = 16;
    std::vector<int> expected_ids{1, 2, 3};
};

/// Threshold at >= intensity_threshold, label 8-connected components, drop
/// components smaller than min_area_px, take intensity-weighted centroids and
/// read the corner-notch id pattern. At most one observation per id survives
/// (largest area wins).
MarkerExtraction extract_marker_centers(const imaging::FrameBuffer& frame,
                                        const ExtractParams& params = {});

/// Assemble a position matrix from a complete extraction; std::nullopt when
/// any of markers 1..3 is missing.
std::optional<collision::PositionMatrix> position_matrix_from(const MarkerExtraction& extraction);

struct CircleDetection {
    geometry::PixelPoint center;  // fractional, refined over the winning bins
    double radius_px = 0.0;
    int accumulator_score = 0;    // votes, > 0
};

struct HoughParams {
    double r_min_px = 40.0;
    double r_max_px = 200.0;
    double edge_threshold = 200.0;  // Sobel gradient magnitude
    double vote_fraction = 0.40;    // of the theoretical max for r_min
    int spatial_bin_px = 2;
    int radius_bin_px = 2;
};

/// Gradient-direction Hough circle transform. Each Sobel edge pixel votes
/// along +-gradient for every radius in the band; local accumulator maxima
/// above the vote threshold come back strongest-first. Ties break toward the
/// smaller radius, then the lower (cy, cx). An empty result means no circle.
/// Throws std::invalid_argument unless 4 <= r_min < r_max <= 300.
std::vector<CircleDetection> hough_circles(const imaging::FrameBuffer& frame,
                                           const HoughParams& params);

inline std::vector<CircleDetection> hough_circles(const imaging::FrameBuffer& frame,
                                                  double r_min_px, double r_max_px) {
    HoughParams p;
    p.r_min_px = r_min_px;
    p.r_max_px = r_max_px;
    return hough_circles(frame, p);
}

/// The circle fit already carries its centroid; kept as a named step so the
/// observation phase reads like the grasp procedure it implements.
inline geometry::PixelPoint polygon_center(const CircleDetection& contour) {
    return contour.center;
}

}  // namespace gripsense::detect
