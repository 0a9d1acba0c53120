#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "marknav/geometry.hpp"

namespace marknav {

/// Spatial link between two marker nodes: the phase difference between
/// the marker normals, the angle each marker's normal makes with the
/// connecting segment, and the straight-line distance.
///
/// Invariant: phi = pi - (theta_ab + theta_ba), normalized.
struct Edge {
    Angle phi{};
    Angle theta_ab{};
    Angle theta_ba{};
    double dist = 0.0;  // meters
};

/// Builds an edge from the two segment angles and the distance; phi
/// follows from the invariant.
inline Edge make_edge(Angle theta_ab, Angle theta_ba, double dist) {
    if (dist < 0.0) throw DomainError("edge distance must be non-negative");
    return Edge{Angle(kPi) - theta_ab - theta_ba, theta_ab, theta_ba, dist};
}

/// How far the edge strays from its phi invariant, as a normalized angle
/// magnitude in radians.
inline double edge_invariant_residual(const Edge& e) {
    return std::abs((e.phi - (Angle(kPi) - e.theta_ab - e.theta_ba)).radians());
}

/// Robot-side measurements taken while linking marker a to marker b.
/// Bearings carry the signs the sensors report: in the canonical
/// arrangement (robot heading away from a, then a left turn to face b)
/// the yaw at a is non-negative and the yaw at b non-positive.
struct LinkMeasurement {
    PolarPose o_a{};      // odometry relative to marker a: (d_a, signed yaw at a)
    Angle theta_delta{};  // turn from the away-from-a ray to facing b
    PolarPose o_b{};      // fresh observation of marker b: (d_b, signed yaw at b)
};

/// Edge between markers a and b from one linking maneuver. Valid for
/// canonical configurations, where every interior angle lies in (0, pi).
inline Edge edge_from_link(const LinkMeasurement& m) {
    if (m.o_a.distance <= 0.0 || m.o_b.distance <= 0.0)
        throw DomainError("link measurement requires positive marker distances");
    const double d_a = m.o_a.distance;
    const double d_b = m.o_b.distance;
    const double dist =
        loc_third_side(d_a, d_b, Angle(kPi - std::abs(m.theta_delta.radians())));
    if (dist == 0.0) throw DegenerateLinkError("linked markers coincide");
    // The yaw at b is measured mirror-handed relative to the yaw at a,
    // hence the sign flip.
    const Angle theta_ab = m.o_a.bearing + loc_angle(d_b, d_a, dist);
    const Angle theta_ba = -m.o_b.bearing + loc_angle(d_a, d_b, dist);
    return make_edge(theta_ab, theta_ba, dist);
}

/// Chains two edges sharing marker b into the direct a-c edge. Valid in
/// the canonical arrangement, where a and c sit on opposite sides of b's
/// normal so the angle at b is the sum of the two stored angles.
inline Edge compose_edges(const Edge& e_ab, const Edge& e_bc) {
    if (e_ab.dist == 0.0 || e_bc.dist == 0.0)
        throw DegenerateLinkError("cannot compose a zero-length edge");
    const Angle at_b = e_ab.theta_ba + e_bc.theta_ab;
    const double d_ac = loc_third_side(e_ab.dist, e_bc.dist, at_b);
    if (d_ac == 0.0) throw DegenerateLinkError("composed markers coincide");
    const Angle phi_ac = e_ab.phi + e_bc.phi;
    const Angle theta_ac = e_ab.theta_ab - loc_angle(e_bc.dist, e_ab.dist, d_ac);
    const Angle theta_ca = Angle(kPi) - phi_ac - theta_ac;  // closes the invariant
    return Edge{phi_ac, theta_ac, theta_ca, d_ac};
}

/// The same physical link described from the other endpoint.
inline Edge reverse(const Edge& e) {
    return Edge{e.phi, e.theta_ba, e.theta_ab, e.dist};
}

/// Node-graph of markers: nodes keyed by marker id, one stored edge per
/// unordered pair (reverse queries answered by edge reversal), and
/// unmeasured edges derived by composing along stored-edge paths.
class MarkerGraph {
public:
    void add_node(int id) {
        if (id < 0) throw DomainError("marker ids are non-negative");
        nodes_.insert(id);
    }

    bool has_node(int id) const { return nodes_.count(id) != 0; }
    const std::set<int>& nodes() const { return nodes_; }

    std::optional<int> home() const { return home_; }

    void set_home(int id) {
        add_node(id);
        home_ = id;
    }

    /// Stores the edge measured from a toward b, adding the endpoints as
    /// nodes. Re-measuring an existing pair overwrites it; in that case
    /// the largest per-field change is returned so callers can log the
    /// discrepancy.
    std::optional<double> add_edge(int a, int b, const Edge& e) {
        if (a == b) throw DomainError("self-edges are undefined");
        add_node(a);
        add_node(b);
        const Edge oriented = a < b ? e : reverse(e);
        const std::pair<int, int> key = ordered(a, b);
        std::optional<double> discrepancy;
        if (auto it = edges_.find(key); it != edges_.end()) {
            const Edge& old = it->second;
            discrepancy = std::max({std::abs((oriented.phi - old.phi).radians()),
                                    std::abs((oriented.theta_ab - old.theta_ab).radians()),
                                    std::abs((oriented.theta_ba - old.theta_ba).radians()),
                                    std::abs(oriented.dist - old.dist)});
        }
        edges_[key] = oriented;
        return discrepancy;
    }

    /// The stored edge for the pair, oriented a->b, if one was measured.
    std::optional<Edge> stored_edge(int a, int b) const {
        const auto it = edges_.find(ordered(a, b));
        if (it == edges_.end()) return std::nullopt;
        return a < b ? it->second : reverse(it->second);
    }

    /// Edges keyed by their (low, high) id pair, oriented low->high.
    const std::map<std::pair<int, int>, Edge>& edges() const { return edges_; }

    /// Edge from `from` to `to`: the stored edge when present, otherwise
    /// the fold of the composition over the fewest-hop path of stored
    /// edges, ties broken toward lower node ids.
    Edge derive_edge(int from, int to) const {
        if (!has_node(from)) throw NotFoundError("unknown marker id " + std::to_string(from));
        if (!has_node(to)) throw NotFoundError("unknown marker id " + std::to_string(to));
        if (from == to) throw DomainError("self-edges are undefined");
        if (auto direct = stored_edge(from, to)) return *direct;

        const std::vector<int> path = shortest_path(from, to);
        if (path.empty())
            throw NoPathError("no stored-edge path between markers " + std::to_string(from) +
                              " and " + std::to_string(to));
        Edge edge = *stored_edge(path[0], path[1]);
        for (std::size_t i = 1; i + 1 < path.size(); ++i)
            edge = compose_edges(edge, *stored_edge(path[i], path[i + 1]));
        return edge;
    }

private:
    static std::pair<int, int> ordered(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

    std::vector<int> shortest_path(int from, int to) const {
        // BFS over neighbors in ascending id order: first arrival is a
        // fewest-hop path, and the ordering makes ties land on the lowest
        // next ids.
        std::map<int, std::set<int>> adjacency;
        for (const auto& [key, edge] : edges_) {
            adjacency[key.first].insert(key.second);
            adjacency[key.second].insert(key.first);
        }
        std::map<int, int> parent;
        std::deque<int> frontier{from};
        parent[from] = from;
        while (!frontier.empty()) {
            const int node = frontier.front();
            frontier.pop_front();
            if (node == to) break;
            for (int next : adjacency[node]) {
                if (parent.count(next)) continue;
                parent[next] = node;
                frontier.push_back(next);
            }
        }
        if (!parent.count(to)) return {};
        std::vector<int> path{to};
        while (path.back() != from) path.push_back(parent[path.back()]);
        std::reverse(path.begin(), path.end());
        return path;
    }

    std::set<int> nodes_;
    std::map<std::pair<int, int>, Edge> edges_;
    std::optional<int> home_;
};

}  // namespace marknav
