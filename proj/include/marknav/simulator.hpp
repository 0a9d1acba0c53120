#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "marknav/geometry.hpp"
#include "marknav/mapgraph.hpp"
#include "marknav/perception.hpp"

namespace marknav {

/// Ground-truth world state: marker poses (heading = outward wall
/// normal), the robot pose, and the seed behind every stochastic draw.
struct WorldModel {
    std::map<int, Pose2D> markers;
    Pose2D robot{};
    std::uint64_t rng_seed = 0;
};

/// Ideal pinhole camera, principal point at the image center, mounted at
/// the robot pose looking along its heading.
struct CameraModel {
    double focal_px = 600.0;
    double image_width = 640.0;
    double image_height = 480.0;
    double marker_side = 0.20;  // meters
};

/// Standard deviations of the injected sensing and actuation noise; all
/// zero means exact.
struct NoiseModel {
    double pixel_sigma = 0.0;  // px, per corner coordinate
    double depth_sigma = 0.0;  // m, per depth reading
    double rot_sigma = 0.0;    // rad, per rotate command
    double trans_sigma = 0.0;  // m per meter commanded
};

struct Command {
    enum class Kind { Rotate, Translate };
    Kind kind = Kind::Rotate;
    double amount = 0.0;  // radians or meters
};

inline Command rotate_command(double radians) { return {Command::Kind::Rotate, radians}; }
inline Command translate_command(double meters) { return {Command::Kind::Translate, meters}; }

/// Deterministic 2-D world: projects markers through the pinhole into
/// corner observations, executes motion primitives with seeded noise, and
/// answers analytic ground-truth queries used as oracles.
class Simulator {
public:
    explicit Simulator(WorldModel world, CameraModel camera = {}, NoiseModel noise = {})
        : world_(std::move(world)), camera_(camera), noise_(noise), rng_(world_.rng_seed) {}

    const WorldModel& world() const { return world_; }
    const CameraModel& camera() const { return camera_; }
    const NoiseModel& noise() const { return noise_; }
    const Pose2D& robot() const { return world_.robot; }

    const Pose2D& marker(int id) const {
        const auto it = world_.markers.find(id);
        if (it == world_.markers.end())
            throw NotFoundError("unknown marker id " + std::to_string(id));
        return it->second;
    }

    /// Projects the marker's four corners through the pinhole. Returns
    /// nothing when the marker is behind the camera, faces away from it,
    /// or any (noisy) corner falls outside the frame. Noise draws are
    /// consumed in a fixed order: corners a, b, c, d (x then y), then the
    /// depth reading.
    std::optional<MarkerObservation> project_marker(int marker_id) {
        const Pose2D& m = marker(marker_id);
        const Pose2D& cam = world_.robot;

        const double view_x = m.x - cam.x;
        const double view_y = m.y - cam.y;
        const double nx = std::cos(m.heading.radians());
        const double ny = std::sin(m.heading.radians());
        if (nx * view_x + ny * view_y >= 0.0) return std::nullopt;  // facing away

        // Horizontal endpoints of the marker on its wall.
        const double half = camera_.marker_side / 2.0;
        const double tx = -ny;  // tangent: normal rotated +90 degrees
        const double ty = nx;
        const Vec2 ends[2] = {{m.x + half * tx, m.y + half * ty},
                              {m.x - half * tx, m.y - half * ty}};

        const double ch = std::cos(cam.heading.radians());
        const double sh = std::sin(cam.heading.radians());
        double u[2];
        double half_height[2];
        for (int i = 0; i < 2; ++i) {
            const double rel_x = ends[i].x - cam.x;
            const double rel_y = ends[i].y - cam.y;
            const double forward = ch * rel_x + sh * rel_y;
            const double right = sh * rel_x - ch * rel_y;
            if (forward <= 0.0) return std::nullopt;  // behind the camera
            u[i] = camera_.image_width / 2.0 + camera_.focal_px * right / forward;
            half_height[i] = camera_.focal_px * half / forward;
        }

        const int left = u[0] <= u[1] ? 0 : 1;
        const int right_end = 1 - left;
        const double cy = camera_.image_height / 2.0;
        MarkerObservation obs;
        obs.marker_id = marker_id;
        obs.corners.a = {u[left], cy - half_height[left]};
        obs.corners.b = {u[left], cy + half_height[left]};
        obs.corners.c = {u[right_end], cy + half_height[right_end]};
        obs.corners.d = {u[right_end], cy - half_height[right_end]};

        for (PixelPoint* p : {&obs.corners.a, &obs.corners.b, &obs.corners.c, &obs.corners.d}) {
            p->x += gauss(noise_.pixel_sigma);
            p->y += gauss(noise_.pixel_sigma);
        }
        obs.depth = std::hypot(view_x, view_y) + gauss(noise_.depth_sigma);

        // Detection requires the whole (noisy) marker inside the frame.
        for (const PixelPoint& p :
             {obs.corners.a, obs.corners.b, obs.corners.c, obs.corners.d}) {
            if (p.x < 0.0 || p.x > camera_.image_width || p.y < 0.0 ||
                p.y > camera_.image_height) {
                return std::nullopt;
            }
        }
        obs.frame_center_offset = (obs.corners.a.x + obs.corners.b.x + obs.corners.c.x +
                                   obs.corners.d.x) / 4.0 - camera_.image_width / 2.0;
        return obs;
    }

    /// Executes one motion primitive; actuation noise is drawn only for
    /// commands that actually move.
    void apply_command(const Command& cmd) {
        if (cmd.kind == Command::Kind::Rotate) {
            const double executed =
                cmd.amount + (cmd.amount != 0.0 ? gauss(noise_.rot_sigma) : 0.0);
            world_.robot.heading = world_.robot.heading + Angle(executed);
        } else {
            const double executed =
                cmd.amount + gauss(noise_.trans_sigma * std::abs(cmd.amount));
            world_.robot.x += executed * std::cos(world_.robot.heading.radians());
            world_.robot.y += executed * std::sin(world_.robot.heading.radians());
        }
    }

    /// Analytic edge between two markers from their ground-truth poses.
    /// Angles are signed: theta_ab is measured from a's normal to the
    /// a->b segment, theta_ba mirror-handed from b's normal to the b->a
    /// segment, so canonical scenes yield the usual positive values and
    /// phi = pi - (theta_ab + theta_ba) equals the normal phase
    /// difference exactly.
    Edge ground_truth_edge(int a, int b) const {
        const Pose2D& ma = marker(a);
        const Pose2D& mb = marker(b);
        const double dx = mb.x - ma.x;
        const double dy = mb.y - ma.y;
        const double dist = std::hypot(dx, dy);
        if (dist == 0.0) throw DegenerateLinkError("markers " + std::to_string(a) + " and " +
                                                   std::to_string(b) + " coincide");
        const Angle theta_ab = Angle(std::atan2(dy, dx)) - ma.heading;
        const Angle theta_ba = mb.heading - Angle(std::atan2(-dy, -dx));
        return make_edge(theta_ab, theta_ba, dist);
    }

    /// Signed yaw a centered observation of the marker should report: the
    /// angle from the marker's normal to the marker->robot ray.
    Angle true_yaw(int marker_id) const {
        const Pose2D& m = marker(marker_id);
        return Angle(std::atan2(world_.robot.y - m.y, world_.robot.x - m.x)) - m.heading;
    }

    /// Ground-truth polar position of the marker relative to the robot.
    PolarPose true_polar(int marker_id) const {
        return polar_of(marker(marker_id), world_.robot);
    }

private:
    double gauss(double sigma) {
        if (sigma <= 0.0) return 0.0;
        return std::normal_distribution<double>(0.0, sigma)(rng_);
    }

    WorldModel world_;
    CameraModel camera_;
    NoiseModel noise_;
    std::mt19937_64 rng_;
};

}  // namespace marknav
