#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "marknav/mission.hpp"
#include "support/scenes.hpp"

using namespace marknav;
using Catch::Matchers::WithinAbs;

namespace {

/// Four markers at the wall midpoints of a 2x2 room, normals inward.
WorldModel square_room(const Pose2D& robot) {
    WorldModel world;
    world.markers[0] = Pose2D{1.0, 0.0, Angle(kPi / 2.0)};
    world.markers[1] = Pose2D{0.0, 1.0, Angle{}};
    world.markers[2] = Pose2D{1.0, 2.0, Angle(-kPi / 2.0)};
    world.markers[3] = Pose2D{2.0, 1.0, Angle(kPi)};
    world.robot = robot;
    return world;
}

Scenario parse_scenario(const std::string& text) {
    std::istringstream in(text);
    return load_scenario(in);
}

}  // namespace

TEST_CASE("scenario parsing") {
    const Scenario s = parse_scenario(R"({
        "world": "room.json",
        "home": 0,
        "mission": [
            {"op": "goal", "d": 1.5, "theta_deg": -45.0},
            {"op": "observe", "marker": 2},
            {"op": "link", "from": 0, "to": 1},
            {"op": "goto_marker", "via": 0, "target": 2, "standoff_d": 0.4},
            {"op": "dock", "marker": 2, "waypoint_d": 1.0, "final_yaw_deg": 180.0,
             "approach_d": 0.25}
        ]
    })");
    CHECK(s.world_path == "room.json");
    REQUIRE(s.home.has_value());
    CHECK(*s.home == 0);
    REQUIRE(s.ops.size() == 5);
    CHECK(s.ops[0].kind == ScenarioOp::Kind::Goal);
    CHECK_THAT(s.ops[0].goal.bearing.degrees(), WithinAbs(-45.0, 1e-12));
    CHECK(s.ops[1].kind == ScenarioOp::Kind::Observe);
    CHECK(s.ops[2].kind == ScenarioOp::Kind::Link);
    CHECK(s.ops[3].kind == ScenarioOp::Kind::GotoMarker);
    CHECK(s.ops[3].standoff == 0.4);
    CHECK(s.ops[4].kind == ScenarioOp::Kind::Dock);
    CHECK_THAT(s.ops[4].plan.final_yaw.radians(), WithinAbs(kPi, 1e-12));
    CHECK(s.ops[4].plan.approach_distance == 0.25);
}

TEST_CASE("scenario parse errors") {
    CHECK_THROWS_AS(parse_scenario(R"({"mission": [{"op": "fly"}]})"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"mission": [{"op": "goal", "d": 1.0}]})"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"mission": "nope"})"), ParseError);
    CHECK_THROWS_AS(parse_scenario("{"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"mission": [{"op": "goal", "d": -1, "theta_deg": 0}]})"),
                    ParseError);
}

TEST_CASE("goal missions dead-reckon exactly in a noiseless world") {
    Simulator sim(WorldModel{});
    Scenario scenario;
    scenario.ops = {ScenarioOp{ScenarioOp::Kind::Goal, PolarPose{1.0, Angle{}}, -1, -1, 0.5, {}},
                    ScenarioOp{ScenarioOp::Kind::Goal,
                               PolarPose{1.0, Angle(kPi / 2.0)}, -1, -1, 0.5, {}}};
    const MissionOutcome outcome = run_mission(sim, scenario);
    REQUIRE(outcome.ok);
    CHECK_THAT(sim.robot().x, WithinAbs(1.0, 1e-12));
    CHECK_THAT(sim.robot().y, WithinAbs(1.0, 1e-12));
    REQUIRE(!outcome.trajectory.empty());
    const MissionRecord& last = outcome.trajectory.back();
    CHECK(last.phase == "goal");
    CHECK_THAT(last.odom.distance, WithinAbs(std::sqrt(2.0), 1e-9));
    CHECK_THAT(last.odom.bearing.radians(), WithinAbs(kPi / 4.0, 1e-9));
    CHECK(outcome.report.at("status") == "ok");
}

TEST_CASE("link missions build a map that matches the world") {
    // Vantage points chosen inside each pair's canonical lens.
    Simulator sim(square_room(Pose2D{0.8, 0.6, Angle{}}));
    const Scenario scenario = parse_scenario(R"({
        "mission": [
            {"op": "link", "from": 0, "to": 1},
            {"op": "goal", "d": 0.63245553203367588, "theta_deg": -45.0},
            {"op": "link", "from": 1, "to": 2}
        ]
    })");
    const MissionOutcome outcome = run_mission(sim, scenario);
    REQUIRE(outcome.ok);
    REQUIRE(outcome.graph.home().has_value());
    CHECK(*outcome.graph.home() == 0);  // first linked marker
    CHECK(outcome.graph.nodes() == std::set<int>{0, 1, 2});
    CHECK(outcome.observations.size() == 4);

    const Simulator oracle{square_room(Pose2D{})};
    for (const auto& [pair, want] : {std::pair{std::pair{0, 1}, oracle.ground_truth_edge(0, 1)},
                                     std::pair{std::pair{1, 2}, oracle.ground_truth_edge(1, 2)}}) {
        const auto stored = outcome.graph.stored_edge(pair.first, pair.second);
        REQUIRE(stored.has_value());
        // Centering runs to a 5 px tolerance, which leaves the link
        // measurements about half a degree of heading slack each.
        CHECK_THAT(stored->dist, WithinAbs(want.dist, 0.05));
        CHECK_THAT((stored->theta_ab - want.theta_ab).degrees(), WithinAbs(0.0, 2.0));
        CHECK_THAT((stored->theta_ba - want.theta_ba).degrees(), WithinAbs(0.0, 2.0));
        CHECK_THAT((stored->phi - want.phi).degrees(), WithinAbs(0.0, 2.0));
    }

    // The derived diagonal matches the analytic one.
    const Edge diagonal = outcome.graph.derive_edge(0, 2);
    const Edge want = oracle.ground_truth_edge(0, 2);
    CHECK_THAT(diagonal.dist, WithinAbs(want.dist, 0.05));
    CHECK_THAT((diagonal.theta_ab - want.theta_ab).degrees(), WithinAbs(0.0, 2.0));
}

TEST_CASE("goto_marker navigates through the graph to a standoff") {
    Simulator sim(square_room(Pose2D{0.8, 0.6, Angle{}}));
    const Scenario scenario = parse_scenario(R"({
        "mission": [
            {"op": "link", "from": 0, "to": 1},
            {"op": "goal", "d": 0.63245553203367588, "theta_deg": -45.0},
            {"op": "link", "from": 1, "to": 2},
            {"op": "goto_marker", "via": 1, "target": 2, "standoff_d": 0.5}
        ]
    })");
    const MissionOutcome outcome = run_mission(sim, scenario);
    REQUIRE(outcome.ok);
    const Pose2D& target = sim.world().markers.at(2);
    const double gap = std::hypot(sim.robot().x - target.x, sim.robot().y - target.y);
    CHECK_THAT(gap, WithinAbs(0.5, 0.05));
}

TEST_CASE("failed ops mark the outcome with their phase") {
    Simulator sim(square_room(Pose2D{0.8, 0.6, Angle{}}));
    Scenario scenario;
    ScenarioOp link;
    link.kind = ScenarioOp::Kind::Link;
    link.marker = 0;
    link.target = 9;  // not in the world
    scenario.ops = {link};
    const MissionOutcome outcome = run_mission(sim, scenario);
    CHECK(!outcome.ok);
    CHECK(outcome.phase == "link");
    CHECK(outcome.report.at("status") == "fail");
    CHECK(!outcome.error.empty());
}

TEST_CASE("missions are deterministic per seed") {
    const auto run = [] {
        WorldModel world = square_room(Pose2D{0.8, 0.6, Angle{}});
        world.rng_seed = 21;
        NoiseModel noise;
        noise.pixel_sigma = 0.5;
        noise.rot_sigma = deg_to_rad(0.1);
        noise.trans_sigma = 0.002;
        Simulator sim(world, CameraModel{}, noise);
        const Scenario scenario = parse_scenario(R"({
            "mission": [{"op": "link", "from": 0, "to": 1}]
        })");
        const MissionOutcome outcome = run_mission(sim, scenario);
        std::ostringstream csv;
        write_mission_csv(outcome.trajectory, csv);
        return csv.str() + outcome.report.dump();
    };
    CHECK(run() == run());
}

TEST_CASE("mission trajectory export format") {
    Simulator sim(WorldModel{});
    Scenario scenario;
    scenario.ops = {ScenarioOp{ScenarioOp::Kind::Goal, PolarPose{2.0, Angle{}}, -1, -1, 0.5, {}}};
    const MissionOutcome outcome = run_mission(sim, scenario);
    std::ostringstream csv;
    write_mission_csv(outcome.trajectory, csv);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "step,phase,x_m,y_m,heading_rad,d_m,theta_rad");
    std::string row;
    std::getline(lines, row);
    CHECK(row.rfind("0,goal,", 0) == 0);
}
