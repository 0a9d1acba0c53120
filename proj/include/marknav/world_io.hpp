#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "marknav/simulator.hpp"

namespace marknav {

/// Everything a world file carries: the ground-truth world plus the
/// camera and noise configuration to run it with.
struct WorldFile {
    WorldModel world;
    CameraModel camera;
    NoiseModel noise;
};

namespace detail {

inline double number_field(const nlohmann::json& obj, const std::string& key,
                           const std::string& where) {
    if (!obj.contains(key))
        throw ParseError(where + ": missing field \"" + key + "\"");
    if (!obj.at(key).is_number())
        throw ParseError(where + ": field \"" + key + "\" must be a number");
    return obj.at(key).get<double>();
}

inline double number_field_or(const nlohmann::json& obj, const std::string& key,
                              double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw ParseError(where + ": field \"" + key + "\" must be a number");
    return obj.at(key).get<double>();
}

}  // namespace detail

inline WorldFile world_from_json(const nlohmann::json& doc) {
    WorldFile file;
    if (!doc.is_object()) throw ParseError("world: document must be a JSON object");
    if (!doc.contains("markers") || !doc.at("markers").is_array())
        throw ParseError("world: missing \"markers\" array");
    for (const nlohmann::json& entry : doc.at("markers")) {
        const double id_value = detail::number_field(entry, "id", "world marker");
        const int id = static_cast<int>(id_value);
        if (id < 0 || id_value != id)
            throw ParseError("world marker: \"id\" must be a non-negative integer");
        if (file.world.markers.count(id))
            throw ParseError("world marker: duplicate id " + std::to_string(id));
        file.world.markers[id] =
            Pose2D{detail::number_field(entry, "x", "world marker"),
                   detail::number_field(entry, "y", "world marker"),
                   Angle::from_degrees(detail::number_field(entry, "normal_deg", "world marker"))};
    }
    if (!doc.contains("robot")) throw ParseError("world: missing \"robot\" object");
    const nlohmann::json& robot = doc.at("robot");
    file.world.robot = Pose2D{detail::number_field(robot, "x", "world robot"),
                              detail::number_field(robot, "y", "world robot"),
                              Angle::from_degrees(
                                  detail::number_field(robot, "heading_deg", "world robot"))};
    if (doc.contains("camera")) {
        const nlohmann::json& cam = doc.at("camera");
        file.camera.focal_px = detail::number_field_or(cam, "focal_px", 600.0, "world camera");
        file.camera.image_width = detail::number_field_or(cam, "width", 640.0, "world camera");
        file.camera.image_height = detail::number_field_or(cam, "height", 480.0, "world camera");
        file.camera.marker_side =
            detail::number_field_or(cam, "marker_side_m", 0.20, "world camera");
        if (file.camera.focal_px <= 0.0 || file.camera.marker_side <= 0.0)
            throw ParseError("world camera: focal_px and marker_side_m must be positive");
    }
    if (doc.contains("noise")) {
        const nlohmann::json& noise = doc.at("noise");
        file.noise.pixel_sigma = detail::number_field_or(noise, "pixel_px", 0.0, "world noise");
        file.noise.depth_sigma = detail::number_field_or(noise, "depth_m", 0.0, "world noise");
        file.noise.rot_sigma =
            deg_to_rad(detail::number_field_or(noise, "rot_deg", 0.0, "world noise"));
        file.noise.trans_sigma = detail::number_field_or(noise, "trans_frac", 0.0, "world noise");
        if (file.noise.pixel_sigma < 0.0 || file.noise.depth_sigma < 0.0 ||
            file.noise.rot_sigma < 0.0 || file.noise.trans_sigma < 0.0)
            throw ParseError("world noise: sigmas must be non-negative");
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer())
            throw ParseError("world: \"seed\" must be an integer");
        file.world.rng_seed = doc.at("seed").get<std::uint64_t>();
    }
    return file;
}

inline nlohmann::json world_to_json(const WorldFile& file) {
    nlohmann::json doc;
    doc["markers"] = nlohmann::json::array();
    for (const auto& [id, pose] : file.world.markers) {
        doc["markers"].push_back({{"id", id},
                                  {"x", pose.x},
                                  {"y", pose.y},
                                  {"normal_deg", pose.heading.degrees()}});
    }
    doc["robot"] = {{"x", file.world.robot.x},
                    {"y", file.world.robot.y},
                    {"heading_deg", file.world.robot.heading.degrees()}};
    doc["camera"] = {{"focal_px", file.camera.focal_px},
                     {"width", file.camera.image_width},
                     {"height", file.camera.image_height},
                     {"marker_side_m", file.camera.marker_side}};
    doc["noise"] = {{"pixel_px", file.noise.pixel_sigma},
                    {"depth_m", file.noise.depth_sigma},
                    {"rot_deg", rad_to_deg(file.noise.rot_sigma)},
                    {"trans_frac", file.noise.trans_sigma}};
    doc["seed"] = file.world.rng_seed;
    return doc;
}

inline WorldFile load_world(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("world: invalid JSON: ") + e.what());
    }
    return world_from_json(doc);
}

inline void save_world(const WorldFile& file, std::ostream& out) {
    out << world_to_json(file).dump(2) << '\n';
}

}  // namespace marknav
