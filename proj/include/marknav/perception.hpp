#pragma once

#include <cmath>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "marknav/geometry.hpp"

namespace marknav {

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Four detected marker corners in pixel space.
/// Ordering contract: a = top-left, b = bottom-left, c = bottom-right,
/// d = top-right, so ab and dc are the vertical sides and ad, bc the
/// horizontal ones. Ordering is part of the input format; it is never
/// re-derived from the pixel values.
struct CornerSet {
    PixelPoint a;
    PixelPoint b;
    PixelPoint c;
    PixelPoint d;
};

/// One marker detection: corners, the depth reading at the marker center,
/// and the horizontal offset of the corner centroid from the image center
/// (positive when the marker sits right of center).
struct MarkerObservation {
    int marker_id = 0;
    CornerSet corners{};
    double depth = 0.0;               // meters
    double frame_center_offset = 0.0; // pixels
};

/// Output of the apparent-side-length yaw estimate.
struct YawEstimate {
    double apparent_side = 0.0;  // s_a, pixels
    double ideal_side = 0.0;     // s_i, pixels
    Angle theta{};               // signed yaw, |theta| <= pi/2
};

/// Marker yaw from corner pixels alone, no camera calibration.
///
/// The apparent horizontal side length s_a is the mean of the top and
/// bottom side lengths. The reference side length s_i is the mean of the
/// two vertical sides; the near side is stretched and the far side
/// shrunk by projection in exactly offsetting amounts, so the mean
/// cancels the foreshortening of an ideal pinhole and s_a / s_i is the
/// cosine of the yaw. The shorter vertical side tells which way the
/// marker is turned: left side shorter means positive yaw. Equal vertical
/// sides mean a symmetric image, which is only consistent with a
/// fronto-parallel marker, so that case returns exactly zero.
inline YawEstimate estimate_yaw(const CornerSet& corners) {
    for (const PixelPoint& p : {corners.a, corners.b, corners.c, corners.d}) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DomainError("corner coordinates must be finite");
    }
    const double left = std::abs(corners.a.y - corners.b.y);
    const double right = std::abs(corners.d.y - corners.c.y);
    if (left == 0.0 || right == 0.0)
        throw DomainError("degenerate vertical side in corner set");
    const double apparent =
        (std::abs(corners.a.x - corners.d.x) + std::abs(corners.c.x - corners.b.x)) / 2.0;
    const double ideal = (left + right) / 2.0;
    const double ratio = apparent / ideal;
    if (ratio > 1.0 + kCosineClampTolerance) {
        throw InconsistentCornersError("apparent side exceeds reference side (ratio = " +
                                       std::to_string(ratio) + ")");
    }
    if (left == right) return YawEstimate{apparent, ideal, Angle{}};
    const double magnitude = std::acos(std::min(ratio, 1.0));
    return YawEstimate{apparent, ideal, Angle(left < right ? magnitude : -magnitude)};
}

/// Affine correction applied to raw depth readings:
/// corrected = scale * depth + offset. Covers a fixed sensor-to-reference
/// offset; the default changes nothing.
struct DistanceCorrection {
    double scale = 1.0;
    double offset = 0.0;  // meters
};

inline constexpr double kDefaultCenterTolerancePx = 5.0;

/// Robot pose relative to the observed marker: corrected distance plus
/// the marker yaw. The marker must be roughly centered in frame; the yaw
/// ratio picks up an off-axis bias otherwise, so off-center observations
/// are rejected instead of silently degraded.
inline PolarPose localize(const MarkerObservation& obs,
                          const DistanceCorrection& correction = {},
                          double center_tolerance_px = kDefaultCenterTolerancePx) {
    if (obs.depth <= 0.0) throw DomainError("depth reading must be positive");
    if (std::abs(obs.frame_center_offset) > center_tolerance_px) {
        throw MisalignmentError("marker centroid " + std::to_string(obs.frame_center_offset) +
                                " px off center (tolerance " +
                                std::to_string(center_tolerance_px) + " px)");
    }
    const YawEstimate yaw = estimate_yaw(obs.corners);
    return PolarPose{correction.scale * obs.depth + correction.offset, yaw.theta};
}

/// Polar observation to Cartesian: x lateral, y along the line of sight.
inline Vec2 to_cartesian(const PolarPose& p) {
    return Vec2{p.distance * std::sin(p.bearing.radians()),
                p.distance * std::cos(p.bearing.radians())};
}

inline constexpr const char* kObservationLogHeader =
    "marker_id,xa,ya,xb,yb,xc,yc,xd,yd,depth_m";

/// Writes observations in the replayable CSV log format. The frame offset
/// is not part of the format; logged observations are the centered ones.
inline void write_observation_log(const std::vector<MarkerObservation>& observations,
                                  std::ostream& out) {
    out << kObservationLogHeader << '\n';
    out << std::setprecision(17);
    for (const MarkerObservation& o : observations) {
        out << o.marker_id << ',' << o.corners.a.x << ',' << o.corners.a.y << ','
            << o.corners.b.x << ',' << o.corners.b.y << ',' << o.corners.c.x << ','
            << o.corners.c.y << ',' << o.corners.d.x << ',' << o.corners.d.y << ','
            << o.depth << '\n';
    }
}

/// Parses an observation log. Throws ParseError with the offending row
/// number on malformed input.
inline std::vector<MarkerObservation> read_observation_log(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("observation log is missing its header row");
    if (line != kObservationLogHeader)
        throw ParseError("observation log header mismatch: got \"" + line + "\"");
    std::vector<MarkerObservation> rows;
    int row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        std::istringstream fields(line);
        double values[10];
        std::string field;
        for (int i = 0; i < 10; ++i) {
            if (!std::getline(fields, field, ',')) {
                throw ParseError("row " + std::to_string(row_number) + ": expected 10 fields");
            }
            try {
                size_t used = 0;
                values[i] = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ParseError("row " + std::to_string(row_number) + ", field " +
                                 std::to_string(i + 1) + ": not a number: \"" + field + "\"");
            }
        }
        if (std::getline(fields, field, ','))
            throw ParseError("row " + std::to_string(row_number) + ": trailing fields");
        MarkerObservation obs;
        obs.marker_id = static_cast<int>(values[0]);
        if (obs.marker_id < 0 || values[0] != obs.marker_id)
            throw ParseError("row " + std::to_string(row_number) +
                             ": marker_id must be a non-negative integer");
        obs.corners = CornerSet{{values[1], values[2]},
                                {values[3], values[4]},
                                {values[5], values[6]},
                                {values[7], values[8]}};
        for (int i = 1; i <= 8; ++i) {
            if (values[i] < 0.0)
                throw ParseError("row " + std::to_string(row_number) +
                                 ": corner coordinates must be non-negative");
        }
        obs.depth = values[9];
        if (!(obs.depth > 0.0))
            throw ParseError("row " + std::to_string(row_number) + ": depth must be positive");
        rows.push_back(obs);
    }
    return rows;
}

}  // namespace marknav
