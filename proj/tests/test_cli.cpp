#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "marknav/world_io.hpp"

using namespace marknav;
namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = "cli_fixtures";

int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(MARKNAV_CLI_PATH) + " " + args + " > " +
                            stdout_file.string() + " 2> " + stdout_file.string() + ".err";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

/// Charging-station world: marker 2 three meters out at 25 degrees with
/// its normal pointing back at the start; the robot faces away.
void write_dock_world(const fs::path& path, std::uint64_t seed = 1) {
    WorldFile file;
    const double bearing = deg_to_rad(25.0);
    file.world.markers[2] =
        Pose2D{3.0 * std::cos(bearing), 3.0 * std::sin(bearing), Angle(bearing + kPi)};
    file.world.robot = Pose2D{0.0, 0.0, Angle(kPi)};
    file.world.rng_seed = seed;
    std::ofstream out(path);
    save_world(file, out);
}

/// Square-room world with canonical vantage for linking 0-1 and 1-2.
void write_room_world(const fs::path& path) {
    WorldFile file;
    file.world.markers[0] = Pose2D{1.0, 0.0, Angle(kPi / 2.0)};
    file.world.markers[1] = Pose2D{0.0, 1.0, Angle{}};
    file.world.markers[2] = Pose2D{1.0, 2.0, Angle(-kPi / 2.0)};
    file.world.markers[3] = Pose2D{2.0, 1.0, Angle(kPi)};
    file.world.robot = Pose2D{0.8, 0.6, Angle{}};
    std::ofstream out(path);
    save_world(file, out);
}

struct Fixtures {
    Fixtures() {
        fs::remove_all(kWorkDir);
        fs::create_directories(kWorkDir);
        write_dock_world(kWorkDir / "dock_world.json");
        write_room_world(kWorkDir / "room_world.json");
        write_text(kWorkDir / "dock_scenario.json", R"({
            "world": "dock_world.json",
            "mission": [{"op": "dock", "marker": 2, "waypoint_d": 1.0,
                         "final_yaw_deg": 180.0, "approach_d": 0.3}]
        })");
        write_text(kWorkDir / "map_scenario.json", R"({
            "world": "room_world.json",
            "home": 0,
            "mission": [
                {"op": "link", "from": 0, "to": 1},
                {"op": "goal", "d": 0.63245553203367588, "theta_deg": -45.0},
                {"op": "link", "from": 1, "to": 2}
            ]
        })");
        write_text(kWorkDir / "observe_scenario.json", R"({
            "world": "observe_world.json",
            "mission": [{"op": "observe", "marker": 0}]
        })");
        WorldFile observe;
        observe.world.markers[0] = Pose2D{2.0, 0.0, Angle(kPi - deg_to_rad(25.0))};
        std::ofstream out(kWorkDir / "observe_world.json");
        save_world(observe, out);
    }
};

std::string last_line(const std::string& text) {
    std::istringstream lines(text);
    std::string line, last;
    while (std::getline(lines, line))
        if (!line.empty()) last = line;
    return last;
}

}  // namespace

TEST_CASE("cli end to end") {
    static Fixtures fixtures;  // shared across sections, built once

    SECTION("simulate runs the docking mission and writes artifacts") {
        const int rc = run_cli("simulate --scenario " +
                                   (kWorkDir / "dock_scenario.json").string() + " --out " +
                                   (kWorkDir / "run_a").string(),
                               kWorkDir / "sim_a.out");
        CHECK(rc == 0);
        CHECK(last_line(slurp(kWorkDir / "sim_a.out")) == "status=ok phase=done");

        const auto report = nlohmann::json::parse(slurp(kWorkDir / "run_a" / "report.json"));
        CHECK(report.at("status") == "ok");
        const auto& dock_op = report.at("ops").at(0);
        CHECK(dock_op.at("op") == "dock");
        CHECK(dock_op.at("position_error_m").get<double>() <= 0.05);
        CHECK(dock_op.at("yaw_error_rad").get<double>() <= deg_to_rad(2.0));

        const std::string trajectory = slurp(kWorkDir / "run_a" / "trajectory.csv");
        const std::size_t search = trajectory.find(",search,");
        const std::size_t waypoint = trajectory.find(",waypoint,");
        const std::size_t align = trajectory.find(",align,");
        const std::size_t approach = trajectory.find(",approach,");
        REQUIRE(search != std::string::npos);
        REQUIRE(waypoint != std::string::npos);
        REQUIRE(align != std::string::npos);
        REQUIRE(approach != std::string::npos);
        CHECK(search < waypoint);
        CHECK(waypoint < align);
        CHECK(align < approach);

        CHECK(fs::exists(kWorkDir / "run_a" / "observations.csv"));
        CHECK(fs::exists(kWorkDir / "run_a" / "map.json"));
    }

    SECTION("identical seeds give byte-identical artifacts") {
        run_cli("simulate --scenario " + (kWorkDir / "dock_scenario.json").string() +
                    " --out " + (kWorkDir / "run_b").string() + " --seed 7 --noise pixel=0.5",
                kWorkDir / "sim_b.out");
        run_cli("simulate --scenario " + (kWorkDir / "dock_scenario.json").string() +
                    " --out " + (kWorkDir / "run_c").string() + " --seed 7 --noise pixel=0.5",
                kWorkDir / "sim_c.out");
        for (const char* name : {"trajectory.csv", "report.json", "map.json",
                                 "observations.csv"}) {
            CHECK(slurp(kWorkDir / "run_b" / name) == slurp(kWorkDir / "run_c" / name));
        }
    }

    SECTION("missing marker fails with the phase named") {
        write_text(kWorkDir / "bad_scenario.json", R"({
            "world": "dock_world.json",
            "mission": [{"op": "dock", "marker": 9}]
        })");
        const int rc = run_cli("simulate --scenario " +
                                   (kWorkDir / "bad_scenario.json").string() + " --out " +
                                   (kWorkDir / "run_bad").string(),
                               kWorkDir / "sim_bad.out");
        CHECK(rc == 1);
        CHECK(last_line(slurp(kWorkDir / "sim_bad.out")) == "status=fail phase=search");
        const auto report = nlohmann::json::parse(slurp(kWorkDir / "run_bad" / "report.json"));
        CHECK(report.at("status") == "fail");
        CHECK(report.at("error").get<std::string>().find("9") != std::string::npos);
    }

    SECTION("malformed input exits 2") {
        write_text(kWorkDir / "broken_world.json", "{len");
        write_text(kWorkDir / "broken_scenario.json", R"({
            "world": "broken_world.json",
            "mission": [{"op": "observe", "marker": 0}]
        })");
        const int rc = run_cli("simulate --scenario " +
                                   (kWorkDir / "broken_scenario.json").string() + " --out " +
                                   (kWorkDir / "run_broken").string(),
                               kWorkDir / "sim_broken.out");
        CHECK(rc == 2);
        CHECK(last_line(slurp(kWorkDir / "sim_broken.out")) == "status=error phase=load");
    }

    SECTION("map build, derive, export, validate") {
        const int rc_build = run_cli("map build --scenario " +
                                         (kWorkDir / "map_scenario.json").string() + " --map " +
                                         (kWorkDir / "room_map.json").string(),
                                     kWorkDir / "map_build.out");
        CHECK(rc_build == 0);

        const int rc_derive = run_cli("map derive 0 2 --map " +
                                          (kWorkDir / "room_map.json").string(),
                                      kWorkDir / "map_derive.out");
        CHECK(rc_derive == 0);
        const std::string derived = slurp(kWorkDir / "map_derive.out");
        CHECK(derived.find("E(0->2)") != std::string::npos);
        CHECK(derived.find("d=2.0") != std::string::npos);
        CHECK(derived.find("phi=") != std::string::npos);

        CHECK(run_cli("map derive 0 0 --map " + (kWorkDir / "room_map.json").string(),
                      kWorkDir / "map_self.out") == 1);
        CHECK(run_cli("map derive 0 7 --map " + (kWorkDir / "room_map.json").string(),
                      kWorkDir / "map_unknown.out") == 1);

        const int rc_export = run_cli("map export --map " +
                                          (kWorkDir / "room_map.json").string() +
                                          " --format dot",
                                      kWorkDir / "map_export.out");
        CHECK(rc_export == 0);
        const std::string dot = slurp(kWorkDir / "map_export.out");
        CHECK(dot.find("graph marker_map {") != std::string::npos);
        CHECK(dot.find("0 -- 1") != std::string::npos);

        CHECK(run_cli("map validate --map " + (kWorkDir / "room_map.json").string(),
                      kWorkDir / "map_validate.out") == 0);

        // Corrupt one edge's phi and validation must name it.
        auto doc = nlohmann::json::parse(slurp(kWorkDir / "room_map.json"));
        doc["edges"][0]["phi"] = doc["edges"][0]["phi"].get<double>() + 0.5;
        write_text(kWorkDir / "corrupt_map.json", doc.dump(2));
        CHECK(run_cli("map validate --map " + (kWorkDir / "corrupt_map.json").string(),
                      kWorkDir / "map_corrupt.out") == 1);
        CHECK(slurp((kWorkDir / "map_corrupt.out").string() + ".err").find("invariant") !=
              std::string::npos);
    }

    SECTION("replay reports angles that match the scene") {
        run_cli("simulate --scenario " + (kWorkDir / "observe_scenario.json").string() +
                    " --out " + (kWorkDir / "run_obs").string(),
                kWorkDir / "sim_obs.out");
        const int rc = run_cli("replay --log " +
                                   (kWorkDir / "run_obs" / "observations.csv").string(),
                               kWorkDir / "replay.out");
        CHECK(rc == 0);
        const std::string out = slurp(kWorkDir / "replay.out");
        CHECK(last_line(out) == "status=ok phase=replay");
        // One observation of marker 0 at 25 degrees, two meters out.
        std::istringstream lines(out);
        std::string header, row;
        std::getline(lines, header);
        CHECK(header == "marker_id,theta_deg,depth_m,x_m,y_m");
        std::getline(lines, row);
        std::istringstream fields(row);
        std::string field;
        std::getline(fields, field, ',');
        CHECK(field == "0");
        std::getline(fields, field, ',');
        CHECK(std::abs(std::stod(field) - 25.0) <= 2.0);
        std::getline(fields, field, ',');
        CHECK(std::abs(std::stod(field) - 2.0) <= 0.01);
        CHECK(out.find("marker 0: rows=1") != std::string::npos);
    }

    SECTION("replay of an empty log succeeds") {
        write_text(kWorkDir / "empty.csv", std::string(kObservationLogHeader) + "\n");
        CHECK(run_cli("replay --log " + (kWorkDir / "empty.csv").string(),
                      kWorkDir / "replay_empty.out") == 0);
    }

    SECTION("replay of a malformed log exits 2") {
        write_text(kWorkDir / "mangled.csv",
                   std::string(kObservationLogHeader) + "\n3,1,2\n");
        CHECK(run_cli("replay --log " + (kWorkDir / "mangled.csv").string(),
                      kWorkDir / "replay_bad.out") == 2);
    }
}
