#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "marknav/errors.hpp"

namespace marknav {

inline constexpr double kPi = std::numbers::pi;

/// Tolerance inside which a law-of-cosines cosine argument is clamped to
/// [-1, 1]; anything further out is treated as inconsistent data rather
/// than silently clamped.
inline constexpr double kCosineClampTolerance = 1e-6;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Planar angle in radians, kept normalized to (-pi, pi].
class Angle {
public:
    constexpr Angle() = default;

    explicit Angle(double radians) : value_(normalized(radians)) {}

    static Angle from_degrees(double degrees) { return Angle(deg_to_rad(degrees)); }

    double radians() const { return value_; }
    double degrees() const { return rad_to_deg(value_); }

    Angle operator+(Angle rhs) const { return Angle(value_ + rhs.value_); }
    Angle operator-(Angle rhs) const { return Angle(value_ - rhs.value_); }
    Angle operator-() const { return Angle(-value_); }

    friend bool operator==(Angle lhs, Angle rhs) { return lhs.value_ == rhs.value_; }

private:
    static double normalized(double raw) {
        if (!std::isfinite(raw)) throw DomainError("angle must be finite");
        double r = std::remainder(raw, 2.0 * kPi);
        if (r <= -kPi) r = kPi;  // -pi and pi are the same direction; pi is the representative
        return r;
    }

    double value_ = 0.0;
};

/// Reduces a raw radian value to the library's (-pi, pi] representative.
inline Angle normalize_angle(double raw_radians) { return Angle(raw_radians); }

/// Law of cosines, side form: the side opposite `included_angle` in a
/// triangle whose adjacent sides are d1 and d2.
inline double loc_third_side(double d1, double d2, Angle included_angle) {
    if (d1 < 0.0 || d2 < 0.0) throw DomainError("triangle side lengths must be non-negative");
    const double sq = d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * std::cos(included_angle.radians());
    return std::sqrt(std::max(sq, 0.0));
}

/// Law of cosines, angle form: the interior angle enclosed by `adj1` and
/// `adj2`, opposite `opposite`. Result lies in [0, pi].
inline Angle loc_angle(double opposite, double adj1, double adj2) {
    if (adj1 <= 0.0 || adj2 <= 0.0) throw DomainError("adjacent triangle sides must be positive");
    if (opposite < 0.0) throw DomainError("opposite triangle side must be non-negative");
    const double c = (adj1 * adj1 + adj2 * adj2 - opposite * opposite) / (2.0 * adj1 * adj2);
    if (c > 1.0 + kCosineClampTolerance || c < -1.0 - kCosineClampTolerance) {
        throw InconsistentTriangleError("side lengths do not close into a triangle (cos = " +
                                        std::to_string(c) + ")");
    }
    return Angle(std::acos(std::clamp(c, -1.0, 1.0)));
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Planar rigid pose: position in meters plus heading.
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    Angle heading{};
};

/// Rigid-body composition: `motion`, expressed in base's frame, applied
/// after `base`.
inline Pose2D pose_compose(const Pose2D& base, const Pose2D& motion) {
    const double c = std::cos(base.heading.radians());
    const double s = std::sin(base.heading.radians());
    return Pose2D{base.x + c * motion.x - s * motion.y,
                  base.y + s * motion.x + c * motion.y,
                  base.heading + motion.heading};
}

/// The motion "rotate by `turn`, then drive `distance` straight ahead".
inline Pose2D rotate_then_forward(Angle turn, double distance) {
    return Pose2D{distance * std::cos(turn.radians()),
                  distance * std::sin(turn.radians()),
                  turn};
}

/// Distance/bearing pair relative to an observer frame: a goal, an
/// observation, or an origin-relative odometry position.
struct PolarPose {
    double distance = 0.0;
    Angle bearing{};
};

/// Where `target` sits relative to `observer`: Euclidean distance and the
/// signed angle from the observer's heading to the observer->target ray.
/// Coincident positions report bearing 0.
inline PolarPose polar_of(const Pose2D& target, const Pose2D& observer) {
    const double dx = target.x - observer.x;
    const double dy = target.y - observer.y;
    const double dist = std::hypot(dx, dy);
    if (dist == 0.0) return PolarPose{};
    return PolarPose{dist, Angle(std::atan2(dy, dx)) - observer.heading};
}

}  // namespace marknav
