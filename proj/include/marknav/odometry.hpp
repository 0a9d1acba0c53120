#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "marknav/geometry.hpp"

namespace marknav {

/// Polar composition of one executed rotate-then-translate step onto an
/// origin-relative polar position, all through the law of cosines and
/// without any Cartesian intermediate.
///
/// `delta.bearing` is the turn measured from the current away-from-origin
/// ray (for the first step out of the origin that ray is the origin
/// frame's x axis, so the bearing is the plain commanded turn). The
/// distance follows from the triangle with included angle pi - |turn|;
/// the bearing advances by the triangle's angle at the origin, signed
/// like the turn.
inline PolarPose compose_polar(const PolarPose& prev, const PolarPose& delta) {
    if (prev.distance < 0.0 || delta.distance < 0.0)
        throw DomainError("polar distances must be non-negative");
    if (delta.distance == 0.0) return prev;  // pure rotation leaves the position alone
    if (prev.distance == 0.0)
        return PolarPose{delta.distance, prev.bearing + delta.bearing};
    const double dist = loc_third_side(prev.distance, delta.distance,
                                       Angle(kPi - std::abs(delta.bearing.radians())));
    if (dist == 0.0) return PolarPose{};  // back at the origin; bearing pinned to 0
    const Angle swing = loc_angle(delta.distance, dist, prev.distance);
    const double signed_swing = std::copysign(swing.radians(), delta.bearing.radians());
    return PolarPose{dist, prev.bearing + Angle(signed_swing)};
}

/// Origin-relative odometry. The full SE(2) pose is the source of truth;
/// the polar view is recomputed from it after every update. Values are
/// immutable; updates return new states.
class Odometry {
public:
    Odometry() = default;

    explicit Odometry(const Pose2D& origin) : origin_(origin), pose_(origin) {}

    const Pose2D& origin() const { return origin_; }
    const Pose2D& pose() const { return pose_; }
    const PolarPose& polar() const { return polar_; }
    int step_index() const { return step_; }

    /// Advances by one executed goal: rotate by its bearing, then drive
    /// its distance (negative distances drive in reverse). The first goal
    /// out of a fresh origin becomes the polar position verbatim.
    [[nodiscard]] Odometry update(const PolarPose& executed_goal) const {
        Odometry next = *this;
        next.pose_ = pose_compose(pose_, rotate_then_forward(executed_goal.bearing,
                                                             executed_goal.distance));
        next.polar_ = polar_of(Pose2D{next.pose_.x, next.pose_.y, Angle{}}, origin_);
        next.step_ = step_ + 1;
        return next;
    }

    /// Re-origins at the current pose; the polar position returns to (0, 0).
    [[nodiscard]] Odometry reset() const {
        Odometry next;
        next.origin_ = pose_;
        next.pose_ = pose_;
        return next;
    }

private:
    Pose2D origin_{};
    Pose2D pose_{};
    PolarPose polar_{};
    int step_ = 0;
};

/// Pure law-of-cosines dead reckoning: position kept in polar form only,
/// no Cartesian state. The heading relative to the origin frame is
/// accumulated from the commanded turns so each goal can be re-expressed
/// against the current away-from-origin ray, which is the frame the
/// composition rule is stated in.
class PolarPath {
public:
    const PolarPose& position() const { return position_; }
    Angle heading() const { return heading_; }

    void advance(const PolarPose& goal) {
        const Angle travel = heading_ + goal.bearing;
        if (goal.distance == 0.0) {
            heading_ = travel;
            return;
        }
        if (position_.distance == 0.0) {
            position_ = PolarPose{goal.distance, travel};
        } else {
            position_ = compose_polar(position_, PolarPose{goal.distance,
                                                           travel - position_.bearing});
        }
        heading_ = travel;
    }

private:
    PolarPose position_{};
    Angle heading_{};
};

struct TrajectoryRow {
    int step = 0;
    Pose2D pose{};
    PolarPose polar{};
};

inline constexpr const char* kTrajectoryCsvHeader = "step,x_m,y_m,heading_rad,d_m,theta_rad";

/// Writes one row per odometry update in the trajectory export format.
inline void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, std::ostream& out) {
    out << kTrajectoryCsvHeader << '\n';
    out << std::setprecision(17);
    for (const TrajectoryRow& r : rows) {
        out << r.step << ',' << r.pose.x << ',' << r.pose.y << ','
            << r.pose.heading.radians() << ',' << r.polar.distance << ','
            << r.polar.bearing.radians() << '\n';
    }
}

}  // namespace marknav
