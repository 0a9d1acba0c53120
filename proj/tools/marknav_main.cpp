// Command-line front end: run scripted simulations, build and query marker
// maps, and replay observation logs.
//
// Exit codes: 0 success, 1 mission or logic failure, 2 input error. Every
// exit path ends with one machine-parsable line: status=<ok|fail|error>
// phase=<...>.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "marknav/map_io.hpp"
#include "marknav/mission.hpp"
#include "marknav/perception.hpp"
#include "marknav/world_io.hpp"

namespace fs = std::filesystem;
using namespace marknav;

namespace {

int finish(const std::string& status, const std::string& phase) {
    std::cout << "status=" << status << " phase=" << phase << std::endl;
    if (status == "ok") return 0;
    return status == "fail" ? 1 : 2;
}

std::ifstream open_input(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ParseError(std::string(what) + ": cannot open " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path, const char* what) {
    std::ofstream out(path);
    if (!out) throw ParseError(std::string(what) + ": cannot write " + path.string());
    return out;
}

/// Parses "pixel=1,depth=0.01,rot=0.5,trans=0.01" on top of the world's
/// noise settings; rot is given in degrees.
NoiseModel apply_noise_override(NoiseModel base, const std::string& overrides) {
    std::istringstream stream(overrides);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ParseError("noise override: expected key=value, got \"" + item + "\"");
        const std::string key = item.substr(0, eq);
        double value = 0.0;
        try {
            size_t used = 0;
            value = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("noise override: not a number in \"" + item + "\"");
        }
        if (value < 0.0) throw ParseError("noise override: sigmas must be non-negative");
        if (key == "pixel")
            base.pixel_sigma = value;
        else if (key == "depth")
            base.depth_sigma = value;
        else if (key == "rot")
            base.rot_sigma = deg_to_rad(value);
        else if (key == "trans")
            base.trans_sigma = value;
        else
            throw ParseError("noise override: unknown key \"" + key + "\"");
    }
    return base;
}

struct SimulateArgs {
    std::string world;
    std::string scenario;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string noise;
};

/// Loads world + scenario and runs the mission.
MissionOutcome run_from_files(const SimulateArgs& args) {
    auto scenario_stream = open_input(args.scenario, "scenario");
    Scenario scenario = load_scenario(scenario_stream);

    fs::path world_path;
    if (!args.world.empty()) {
        world_path = args.world;
    } else if (!scenario.world_path.empty()) {
        world_path = fs::path(args.scenario).parent_path() / scenario.world_path;
    } else {
        throw ParseError("no world given: pass --world or set \"world\" in the scenario");
    }
    auto world_stream = open_input(world_path, "world");
    WorldFile world = load_world(world_stream);

    if (args.seed) world.world.rng_seed = *args.seed;
    if (!args.noise.empty()) world.noise = apply_noise_override(world.noise, args.noise);

    Simulator sim(world.world, world.camera, world.noise);
    return run_mission(sim, scenario);
}

int cmd_simulate(const SimulateArgs& args) {
    MissionOutcome outcome;
    try {
        outcome = run_from_files(args);
        fs::create_directories(args.out_dir);
        const fs::path out(args.out_dir);
        {
            auto f = open_output(out / "trajectory.csv", "trajectory");
            write_mission_csv(outcome.trajectory, f);
        }
        {
            auto f = open_output(out / "observations.csv", "observations");
            write_observation_log(outcome.observations, f);
        }
        {
            auto f = open_output(out / "map.json", "map");
            save_graph(outcome.graph, f);
        }
        {
            auto f = open_output(out / "report.json", "report");
            f << outcome.report.dump(2) << '\n';
        }
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    }
    if (!outcome.ok) std::cerr << outcome.error << '\n';
    return finish(outcome.ok ? "ok" : "fail", outcome.ok ? "done" : outcome.phase);
}

int cmd_map_build(const SimulateArgs& args, const std::string& map_path) {
    MissionOutcome outcome;
    try {
        outcome = run_from_files(args);
        if (outcome.ok) {
            auto f = open_output(map_path, "map");
            save_graph(outcome.graph, f);
        }
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    }
    if (!outcome.ok) std::cerr << outcome.error << '\n';
    return finish(outcome.ok ? "ok" : "fail", outcome.ok ? "build" : outcome.phase);
}

int cmd_map_derive(const std::string& map_path, int from, int to) {
    try {
        auto in = open_input(map_path, "map");
        const MarkerGraph graph = load_graph(in);
        const Edge edge = graph.derive_edge(from, to);
        std::cout << std::fixed << "E(" << from << "->" << to << "): d="
                  << std::setprecision(3) << edge.dist << " m, phi=" << std::setprecision(2)
                  << edge.phi.degrees() << " deg, theta_ab=" << edge.theta_ab.degrees()
                  << " deg, theta_ba=" << edge.theta_ba.degrees() << " deg\n";
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("fail", "derive");
    }
    return finish("ok", "derive");
}

int cmd_map_export(const std::string& map_path, const std::string& out_path) {
    try {
        auto in = open_input(map_path, "map");
        const MarkerGraph graph = load_graph(in);
        if (out_path.empty()) {
            write_dot(graph, std::cout);
        } else {
            auto out = open_output(out_path, "dot");
            write_dot(graph, out);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    }
    return finish("ok", "export");
}

int cmd_map_validate(const std::string& map_path) {
    nlohmann::json doc;
    try {
        auto in = open_input(map_path, "map");
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    }
    const std::vector<std::string> issues = validate_graph_json(doc);
    for (const std::string& issue : issues) std::cerr << issue << '\n';
    if (!issues.empty()) return finish("fail", "validate");
    return finish("ok", "validate");
}

int cmd_replay(const std::string& log_path, const DistanceCorrection& correction) {
    std::vector<MarkerObservation> rows;
    try {
        auto in = open_input(log_path, "log");
        rows = read_observation_log(in);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("error", "load");
    }
    std::cout << "marker_id,theta_deg,depth_m,x_m,y_m\n" << std::fixed << std::setprecision(6);
    struct Stats {
        int count = 0;
        double theta_sum = 0.0;
        double theta_max_abs = 0.0;
    };
    std::map<int, Stats> per_marker;
    try {
        for (const MarkerObservation& obs : rows) {
            const YawEstimate yaw = estimate_yaw(obs.corners);
            const PolarPose polar{correction.scale * obs.depth + correction.offset, yaw.theta};
            const Vec2 cart = to_cartesian(polar);
            std::cout << obs.marker_id << ',' << yaw.theta.degrees() << ',' << polar.distance
                      << ',' << cart.x << ',' << cart.y << '\n';
            Stats& s = per_marker[obs.marker_id];
            ++s.count;
            s.theta_sum += yaw.theta.degrees();
            s.theta_max_abs = std::max(s.theta_max_abs, std::abs(yaw.theta.degrees()));
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return finish("fail", "replay");
    }
    for (const auto& [id, s] : per_marker) {
        std::cout << "marker " << id << ": rows=" << s.count
                  << " mean_theta_deg=" << s.theta_sum / s.count
                  << " max_abs_theta_deg=" << s.theta_max_abs << '\n';
    }
    return finish("ok", "replay");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fiducial-marker localization, marker-graph mapping, and docking simulation"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "run a scripted mission in a world");
    simulate->add_option("--world", sim_args.world, "world JSON (overrides the scenario's)");
    simulate->add_option("--scenario", sim_args.scenario, "scenario JSON")->required();
    simulate->add_option("--out", sim_args.out_dir, "artifact output directory")->required();
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = simulate->add_option("--seed", seed_value, "override the world seed");
    simulate->add_option("--noise", sim_args.noise,
                         "override noise: pixel=PX,depth=M,rot=DEG,trans=FRAC");

    CLI::App* map = app.add_subcommand("map", "build, query, export, or validate a marker map");
    map->require_subcommand(1);

    SimulateArgs build_args;
    std::string map_path;
    CLI::App* build = map->add_subcommand("build", "run a mapping scenario and save the graph");
    build->add_option("--world", build_args.world, "world JSON (overrides the scenario's)");
    build->add_option("--scenario", build_args.scenario, "scenario JSON")->required();
    build->add_option("--map", map_path, "output map JSON")->required();

    int derive_from = 0;
    int derive_to = 0;
    std::string derive_map;
    CLI::App* derive = map->add_subcommand("derive", "derive the edge between two markers");
    derive->add_option("from", derive_from, "source marker id")->required();
    derive->add_option("to", derive_to, "target marker id")->required();
    derive->add_option("--map", derive_map, "map JSON")->required();

    std::string export_map;
    std::string export_format = "dot";
    std::string export_out;
    CLI::App* export_cmd = map->add_subcommand("export", "export the map for visualization");
    export_cmd->add_option("--map", export_map, "map JSON")->required();
    export_cmd->add_option("--format", export_format, "output format (dot)")
        ->check(CLI::IsMember({"dot"}));
    export_cmd->add_option("--out", export_out, "output file (default stdout)");

    std::string validate_map;
    CLI::App* validate = map->add_subcommand("validate", "check every edge invariant");
    validate->add_option("--map", validate_map, "map JSON")->required();

    std::string log_path;
    DistanceCorrection replay_correction;
    CLI::App* replay = app.add_subcommand("replay", "replay an observation log");
    replay->add_option("--log", log_path, "observation CSV log")->required();
    replay->add_option("--scale", replay_correction.scale, "distance correction scale");
    replay->add_option("--offset", replay_correction.offset, "distance correction offset, m");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return 0;  // --help
        return finish("error", "args");
    }

    if (*simulate) {
        if (*seed_opt) sim_args.seed = seed_value;
        return cmd_simulate(sim_args);
    }
    if (*build) return cmd_map_build(build_args, map_path);
    if (*derive) return cmd_map_derive(derive_map, derive_from, derive_to);
    if (*export_cmd) return cmd_map_export(export_map, export_out);
    if (*validate) return cmd_map_validate(validate_map);
    if (*replay) return cmd_replay(log_path, replay_correction);
    return finish("error", "args");
}
