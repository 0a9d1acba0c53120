#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/mapgraph.hpp"
#include "marknav/perception.hpp"
#include "marknav/simulator.hpp"

namespace marknav {

/// Locomotion stop tolerances. The defaults sit an order of magnitude
/// below the sensing accuracy so controller error stays negligible.
struct Tolerances {
    double angular = deg_to_rad(0.5);  // rad
    double linear = 0.01;              // m
};

/// Progress through one rotate-then-translate goal. Progress counts the
/// commanded amounts and starts at zero for every new goal.
struct LocomotionGoal {
    PolarPose target{};
    PolarPose progress{};
};

/// Next primitive for the goal: rotate while the angular difference is
/// out of tolerance, then translate, then nothing.
inline std::optional<Command> step_goal(const LocomotionGoal& goal, const Tolerances& tol = {}) {
    const double theta_diff = (goal.target.bearing - goal.progress.bearing).radians();
    if (std::abs(theta_diff) > tol.angular) return rotate_command(theta_diff);
    const double d_diff = goal.target.distance - goal.progress.distance;
    if (std::abs(d_diff) > tol.linear) return translate_command(d_diff);
    return std::nullopt;
}

/// Sees every command right after the simulator executed it.
using CommandObserver = std::function<void(const Command&)>;

namespace detail {
inline void issue(Simulator& sim, const Command& cmd, const CommandObserver& observer) {
    sim.apply_command(cmd);
    if (observer) observer(cmd);
}
}  // namespace detail

/// Drives one polar goal to completion.
inline void execute_goal(Simulator& sim, const PolarPose& target, const Tolerances& tol = {},
                         const CommandObserver& observer = {}) {
    LocomotionGoal goal{target, {}};
    while (const std::optional<Command> cmd = step_goal(goal, tol)) {
        detail::issue(sim, *cmd, observer);
        if (cmd->kind == Command::Kind::Rotate)
            goal.progress.bearing = goal.progress.bearing + Angle(cmd->amount);
        else
            goal.progress.distance += cmd->amount;
    }
}

/// Camera-centering and search parameters.
struct AlignParams {
    double center_tolerance_px = kDefaultCenterTolerancePx;
    Angle search_step = Angle::from_degrees(15.0);
    int max_align_iterations = 50;
};

/// Rotates in place until the marker's centroid sits within the center
/// tolerance, then returns the centered observation. The marker must be
/// in view to start with.
inline MarkerObservation align_to_marker(Simulator& sim, int marker_id,
                                         const AlignParams& params = {},
                                         const CommandObserver& observer = {}) {
    for (int i = 0; i < params.max_align_iterations; ++i) {
        std::optional<MarkerObservation> obs = sim.project_marker(marker_id);
        if (!obs)
            throw SearchRequiredError("marker " + std::to_string(marker_id) +
                                      " left the field of view while aligning");
        if (std::abs(obs->frame_center_offset) <= params.center_tolerance_px) return *obs;
        const double correction =
            -std::atan2(obs->frame_center_offset, sim.camera().focal_px);
        detail::issue(sim, rotate_command(correction), observer);
    }
    throw SearchRequiredError("alignment to marker " + std::to_string(marker_id) +
                              " did not converge");
}

/// Sweeps a full turn in fixed increments until the requested marker is
/// detected, then hands over to alignment.
inline MarkerObservation find_marker(Simulator& sim, int marker_id,
                                     const AlignParams& params = {},
                                     const CommandObserver& observer = {}) {
    const int sweep_steps =
        static_cast<int>(std::ceil(2.0 * kPi / std::abs(params.search_step.radians())));
    for (int i = 0; i <= sweep_steps; ++i) {
        if (sim.project_marker(marker_id))
            return align_to_marker(sim, marker_id, params, observer);
        detail::issue(sim, rotate_command(params.search_step.radians()), observer);
    }
    throw MarkerNotFoundError("marker " + std::to_string(marker_id) +
                              " not detected in a full sweep");
}

/// Executable goal toward a graph target: distance plus the signed turn
/// from a marker-facing orientation.
struct Heading {
    PolarPose o{};
};

/// Goal from the robot's polar position against marker a toward the far
/// endpoint of the a->c edge.
///
/// Distance and turn magnitude come from the triangle robot-a-c. The
/// published angle is unsigned; the sign here steers toward c's side of
/// the robot: seen from a marker-facing orientation, targets that sit
/// further counterclockwise around a appear to the robot's right.
/// A zero-distance result means the robot is already at the target.
inline Heading heading_to_target(const PolarPose& o_ra, const Edge& e_ac) {
    if (o_ra.distance <= 0.0)
        throw DomainError("heading requires a positive distance to marker a");
    const Angle separation = e_ac.theta_ab - o_ra.bearing;  // angle at a: a->robot vs a->c
    const double dist = loc_third_side(e_ac.dist, o_ra.distance, separation);
    if (dist == 0.0) return Heading{};
    const Angle magnitude = loc_angle(e_ac.dist, o_ra.distance, dist);
    const double turn = -std::copysign(magnitude.radians(), separation.radians());
    return Heading{PolarPose{dist, Angle(turn)}};
}

/// Docking approach geometry, all in the target marker's frame.
struct DockingPlan {
    /// First point of the two-leg approach: distance from the marker and
    /// angle from its normal. Zero distance skips the leg and docks along
    /// the current line of sight.
    PolarPose waypoint{1.0, Angle{}};
    /// Probe orientation relative to facing the marker: 0 docks head-on,
    /// pi backs in.
    Angle final_yaw{};
    /// Final standoff from the marker, meters.
    double approach_distance = 0.3;
};

struct PhaseStat {
    std::string name;
    int commands = 0;
};

struct DockingReport {
    std::vector<PhaseStat> phases;
    std::vector<MarkerObservation> observations;  // accepted centered measurements
    Pose2D final_pose{};
    double position_error = 0.0;  // m, against the ideal dock pose
    double yaw_error = 0.0;       // rad
};

/// Sees every docking command tagged with the phase it belongs to.
using DockObserver = std::function<void(const std::string& phase, const Command&)>;

/// Runs the four-phase docking trajectory: search for the marker and
/// center it, move to the waypoint on the approach ray, rotate the
/// probes into place, then close in along the ray to the approach
/// distance. Errors propagate wrapped with the phase they hit.
inline DockingReport dock(Simulator& sim, int marker_id, const DockingPlan& plan,
                          const Tolerances& tol = {}, const AlignParams& align_params = {},
                          const DistanceCorrection& correction = {},
                          const DockObserver& observer = {}) {
    if (plan.approach_distance < 0.0 || plan.waypoint.distance < 0.0)
        throw MissionError("plan", "docking distances must be non-negative");
    if (std::abs(std::sin(plan.final_yaw.radians())) > 1e-9)
        throw MissionError("plan", "approach runs along a fixed ray; final yaw must be 0 or pi");

    DockingReport report;
    std::string phase;
    const CommandObserver phase_observer = [&](const Command& cmd) {
        ++report.phases.back().commands;
        if (observer) observer(phase, cmd);
    };
    const auto enter = [&](const char* name) {
        phase = name;
        report.phases.push_back(PhaseStat{name, 0});
    };
    const auto run = [&](auto&& body) {
        try {
            body();
        } catch (const MissionError&) {
            throw;
        } catch (const Error& e) {
            throw MissionError(phase, e.what());
        }
    };

    PolarPose at_waypoint{};
    run([&] {
        enter("search");
        const MarkerObservation obs = find_marker(sim, marker_id, align_params, phase_observer);
        const PolarPose from_marker = localize(obs, correction, align_params.center_tolerance_px);
        report.observations.push_back(obs);

        if (plan.waypoint.distance > 0.0) {
            enter("waypoint");
            const Edge to_waypoint = make_edge(plan.waypoint.bearing, Angle{}, plan.waypoint.distance);
            const Heading leg = heading_to_target(from_marker, to_waypoint);
            execute_goal(sim, leg.o, tol, phase_observer);
            const MarkerObservation again =
                find_marker(sim, marker_id, align_params, phase_observer);
            at_waypoint = localize(again, correction, align_params.center_tolerance_px);
            report.observations.push_back(again);
        } else {
            at_waypoint = from_marker;
        }

        enter("align");
        if (plan.final_yaw.radians() != 0.0)
            detail::issue(sim, rotate_command(plan.final_yaw.radians()), phase_observer);

        enter("approach");
        const double sign = std::cos(plan.final_yaw.radians()) >= 0.0 ? 1.0 : -1.0;
        const double remaining = at_waypoint.distance - plan.approach_distance;
        if (std::abs(remaining) > tol.linear)
            detail::issue(sim, translate_command(sign * remaining), phase_observer);
    });

    // Score against the ideal dock pose: on the planned approach ray at
    // the approach distance, probes toward the marker.
    const Pose2D& m = sim.marker(marker_id);
    const Angle ray = plan.waypoint.distance > 0.0
                          ? m.heading + plan.waypoint.bearing
                          : Angle(std::atan2(sim.robot().y - m.y, sim.robot().x - m.x));
    const double ideal_x = m.x + plan.approach_distance * std::cos(ray.radians());
    const double ideal_y = m.y + plan.approach_distance * std::sin(ray.radians());
    const Angle ideal_heading = ray + Angle(kPi) + plan.final_yaw;
    report.final_pose = sim.robot();
    report.position_error = std::hypot(sim.robot().x - ideal_x, sim.robot().y - ideal_y);
    report.yaw_error = std::abs((sim.robot().heading - ideal_heading).radians());
    return report;
}

}  // namespace marknav
