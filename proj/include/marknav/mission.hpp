#pragma once

#include <algorithm>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "marknav/map_io.hpp"
#include "marknav/navigator.hpp"
#include "marknav/odometry.hpp"
#include "marknav/simulator.hpp"
#include "marknav/world_io.hpp"

namespace marknav {

/// One scripted mission step.
struct ScenarioOp {
    enum class Kind { Goal, Observe, Link, GotoMarker, Dock };
    Kind kind = Kind::Goal;
    PolarPose goal{};       // Goal
    int marker = -1;        // Observe/Dock marker, Link from, GotoMarker via
    int target = -1;        // Link to, GotoMarker target
    double standoff = 0.5;  // GotoMarker stop distance, meters
    DockingPlan plan{};     // Dock
};

struct Scenario {
    std::string world_path;  // may be empty when the caller supplies the world
    std::optional<int> home;
    std::vector<ScenarioOp> ops;
};

inline Scenario scenario_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("scenario: document must be a JSON object");
    Scenario scenario;
    if (doc.contains("world")) {
        if (!doc.at("world").is_string())
            throw ParseError("scenario: \"world\" must be a path string");
        scenario.world_path = doc.at("world").get<std::string>();
    }
    if (doc.contains("home")) {
        if (!doc.at("home").is_number_integer())
            throw ParseError("scenario: \"home\" must be an integer marker id");
        scenario.home = doc.at("home").get<int>();
    }
    if (!doc.contains("mission") || !doc.at("mission").is_array())
        throw ParseError("scenario: missing \"mission\" array");
    int index = 0;
    for (const nlohmann::json& entry : doc.at("mission")) {
        const std::string where = "scenario mission[" + std::to_string(index++) + "]";
        if (!entry.is_object() || !entry.contains("op") || !entry.at("op").is_string())
            throw ParseError(where + ": missing \"op\" string");
        const std::string op = entry.at("op").get<std::string>();
        ScenarioOp parsed;
        if (op == "goal") {
            parsed.kind = ScenarioOp::Kind::Goal;
            parsed.goal = PolarPose{detail::number_field(entry, "d", where),
                                    Angle::from_degrees(
                                        detail::number_field(entry, "theta_deg", where))};
            if (parsed.goal.distance < 0.0)
                throw ParseError(where + ": goal distance must be non-negative");
        } else if (op == "observe") {
            parsed.kind = ScenarioOp::Kind::Observe;
            parsed.marker = static_cast<int>(detail::number_field(entry, "marker", where));
        } else if (op == "link") {
            parsed.kind = ScenarioOp::Kind::Link;
            parsed.marker = static_cast<int>(detail::number_field(entry, "from", where));
            parsed.target = static_cast<int>(detail::number_field(entry, "to", where));
        } else if (op == "goto_marker") {
            parsed.kind = ScenarioOp::Kind::GotoMarker;
            parsed.marker = static_cast<int>(detail::number_field(entry, "via", where));
            parsed.target = static_cast<int>(detail::number_field(entry, "target", where));
            parsed.standoff = detail::number_field_or(entry, "standoff_d", 0.5, where);
            if (parsed.standoff < 0.0)
                throw ParseError(where + ": standoff_d must be non-negative");
        } else if (op == "dock") {
            parsed.kind = ScenarioOp::Kind::Dock;
            parsed.marker = static_cast<int>(detail::number_field(entry, "marker", where));
            parsed.plan.waypoint =
                PolarPose{detail::number_field_or(entry, "waypoint_d", 1.0, where),
                          Angle::from_degrees(
                              detail::number_field_or(entry, "waypoint_theta_deg", 0.0, where))};
            parsed.plan.final_yaw = Angle::from_degrees(
                detail::number_field_or(entry, "final_yaw_deg", 0.0, where));
            parsed.plan.approach_distance =
                detail::number_field_or(entry, "approach_d", 0.3, where);
        } else {
            throw ParseError(where + ": unknown op \"" + op + "\"");
        }
        scenario.ops.push_back(parsed);
    }
    return scenario;
}

inline Scenario load_scenario(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

/// One executed command: the phase it belonged to, the resulting
/// ground-truth pose, and the dead-reckoned odometry view.
struct MissionRecord {
    int step = 0;
    std::string phase;
    Pose2D pose{};
    PolarPose odom{};
};

struct MissionOutcome {
    bool ok = true;
    std::string phase = "done";
    std::string error;
    std::vector<MissionRecord> trajectory;
    std::vector<MarkerObservation> observations;  // accepted centered measurements
    MarkerGraph graph;
    nlohmann::json report;
};

inline constexpr const char* kMissionCsvHeader =
    "step,phase,x_m,y_m,heading_rad,d_m,theta_rad";

inline void write_mission_csv(const std::vector<MissionRecord>& records, std::ostream& out) {
    out << kMissionCsvHeader << '\n';
    out << std::setprecision(17);
    for (const MissionRecord& r : records) {
        out << r.step << ',' << r.phase << ',' << r.pose.x << ',' << r.pose.y << ','
            << r.pose.heading.radians() << ',' << r.odom.distance << ','
            << r.odom.bearing.radians() << '\n';
    }
}

namespace detail {
inline nlohmann::json edge_json(const Edge& e) {
    return {{"phi", e.phi.radians()},
            {"theta_ab", e.theta_ab.radians()},
            {"theta_ba", e.theta_ba.radians()},
            {"d", e.dist}};
}
}  // namespace detail

/// Runs a scripted mission on the simulator. The returned outcome always
/// carries whatever trajectory, observations, and graph were produced,
/// also when an op failed.
inline MissionOutcome run_mission(Simulator& sim, const Scenario& scenario,
                                  const Tolerances& tol = {}, const AlignParams& align = {},
                                  const DistanceCorrection& correction = {}) {
    MissionOutcome outcome;
    Odometry believed{sim.robot()};
    int step = 0;
    std::string phase = "start";

    const CommandObserver observer = [&](const Command& cmd) {
        believed = believed.update(cmd.kind == Command::Kind::Rotate
                                       ? PolarPose{0.0, Angle(cmd.amount)}
                                       : PolarPose{cmd.amount, Angle{}});
        outcome.trajectory.push_back(MissionRecord{step++, phase, sim.robot(), believed.polar()});
    };

    if (scenario.home) outcome.graph.set_home(*scenario.home);
    nlohmann::json ops = nlohmann::json::array();

    try {
        for (const ScenarioOp& op : scenario.ops) {
            switch (op.kind) {
                case ScenarioOp::Kind::Goal: {
                    phase = "goal";
                    execute_goal(sim, op.goal, tol, observer);
                    ops.push_back({{"op", "goal"},
                                   {"d", op.goal.distance},
                                   {"theta_deg", op.goal.bearing.degrees()}});
                    break;
                }
                case ScenarioOp::Kind::Observe: {
                    phase = "observe";
                    const MarkerObservation obs = find_marker(sim, op.marker, align, observer);
                    const PolarPose measured =
                        localize(obs, correction, align.center_tolerance_px);
                    outcome.observations.push_back(obs);
                    ops.push_back({{"op", "observe"},
                                   {"marker", op.marker},
                                   {"d_m", measured.distance},
                                   {"theta_deg", measured.bearing.degrees()}});
                    break;
                }
                case ScenarioOp::Kind::Link: {
                    phase = "link";
                    const MarkerObservation obs_a = find_marker(sim, op.marker, align, observer);
                    const PolarPose o_a = localize(obs_a, correction, align.center_tolerance_px);
                    outcome.observations.push_back(obs_a);
                    const Angle heading_at_a = believed.pose().heading;

                    const MarkerObservation obs_b = find_marker(sim, op.target, align, observer);
                    const PolarPose o_b = localize(obs_b, correction, align.center_tolerance_px);
                    outcome.observations.push_back(obs_b);
                    const Angle turn = believed.pose().heading - heading_at_a;

                    // The composition rule measures the turn from the
                    // away-from-a ray; the robot faced a, half a revolution
                    // off that ray.
                    const Angle theta_delta = turn - Angle(kPi);
                    const Edge edge = edge_from_link(LinkMeasurement{o_a, theta_delta, o_b});
                    const std::optional<double> discrepancy =
                        outcome.graph.add_edge(op.marker, op.target, edge);
                    if (!outcome.graph.home()) outcome.graph.set_home(op.marker);
                    nlohmann::json entry = {{"op", "link"},
                                            {"from", op.marker},
                                            {"to", op.target},
                                            {"edge", detail::edge_json(edge)}};
                    if (discrepancy) entry["remeasured_discrepancy"] = *discrepancy;
                    ops.push_back(entry);
                    break;
                }
                case ScenarioOp::Kind::GotoMarker: {
                    phase = "goto";
                    const MarkerObservation obs = find_marker(sim, op.marker, align, observer);
                    const PolarPose o_ra = localize(obs, correction, align.center_tolerance_px);
                    outcome.observations.push_back(obs);
                    const Edge edge = outcome.graph.derive_edge(op.marker, op.target);
                    const Heading heading = heading_to_target(o_ra, edge);
                    const PolarPose leg{std::max(heading.o.distance - op.standoff, 0.0),
                                        heading.o.bearing};
                    execute_goal(sim, leg, tol, observer);
                    ops.push_back({{"op", "goto_marker"},
                                   {"via", op.marker},
                                   {"target", op.target},
                                   {"d_heading", heading.o.distance},
                                   {"theta_heading_deg", heading.o.bearing.degrees()}});
                    break;
                }
                case ScenarioOp::Kind::Dock: {
                    phase = "dock";
                    const DockObserver dock_observer = [&](const std::string& dock_phase,
                                                           const Command& cmd) {
                        phase = dock_phase;
                        observer(cmd);
                    };
                    const DockingReport report = dock(sim, op.marker, op.plan, tol, align,
                                                      correction, dock_observer);
                    outcome.observations.insert(outcome.observations.end(),
                                                report.observations.begin(),
                                                report.observations.end());
                    nlohmann::json phases = nlohmann::json::array();
                    for (const PhaseStat& p : report.phases)
                        phases.push_back({{"name", p.name}, {"commands", p.commands}});
                    ops.push_back({{"op", "dock"},
                                   {"marker", op.marker},
                                   {"phases", phases},
                                   {"position_error_m", report.position_error},
                                   {"yaw_error_rad", report.yaw_error}});
                    break;
                }
            }
        }
    } catch (const MissionError& e) {
        outcome.ok = false;
        outcome.phase = e.phase();
        outcome.error = e.what();
    } catch (const Error& e) {
        outcome.ok = false;
        outcome.phase = phase;
        outcome.error = e.what();
    }

    outcome.report = {{"status", outcome.ok ? "ok" : "fail"},
                      {"phase", outcome.ok ? "done" : outcome.phase},
                      {"ops", ops}};
    if (!outcome.ok) outcome.report["error"] = outcome.error;
    return outcome;
}

}  // namespace marknav
