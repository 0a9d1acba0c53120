#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "marknav/mapgraph.hpp"

namespace marknav {

/// Validation threshold for edges read back from files; construction
/// keeps the invariant far tighter, so anything past this is corrupt or
/// hand-edited data.
inline constexpr double kLoadInvariantTolerance = 1e-6;

inline nlohmann::json graph_to_json(const MarkerGraph& graph) {
    nlohmann::json doc;
    doc["home"] = graph.home() ? nlohmann::json(*graph.home()) : nlohmann::json(nullptr);
    doc["nodes"] = nlohmann::json::array();
    for (int id : graph.nodes()) doc["nodes"].push_back(id);
    doc["edges"] = nlohmann::json::array();
    for (const auto& [key, edge] : graph.edges()) {
        doc["edges"].push_back({{"a", key.first},
                                {"b", key.second},
                                {"phi", edge.phi.radians()},
                                {"theta_ab", edge.theta_ab.radians()},
                                {"theta_ba", edge.theta_ba.radians()},
                                {"d", edge.dist}});
    }
    return doc;
}

/// Collects every problem with a map document; empty means valid.
inline std::vector<std::string> validate_graph_json(const nlohmann::json& doc) {
    std::vector<std::string> issues;
    if (!doc.is_object()) return {"map: document must be a JSON object"};
    if (!doc.contains("nodes") || !doc.at("nodes").is_array())
        issues.push_back("map: missing \"nodes\" array");
    if (!doc.contains("edges") || !doc.at("edges").is_array())
        issues.push_back("map: missing \"edges\" array");
    if (!issues.empty()) return issues;

    std::set<int> nodes;
    for (const nlohmann::json& n : doc.at("nodes")) {
        if (!n.is_number_integer() || n.get<int>() < 0) {
            issues.push_back("map: node ids must be non-negative integers");
            continue;
        }
        nodes.insert(n.get<int>());
    }
    if (doc.contains("home") && !doc.at("home").is_null()) {
        if (!doc.at("home").is_number_integer() || !nodes.count(doc.at("home").get<int>()))
            issues.push_back("map: \"home\" must name a node");
    }
    for (const nlohmann::json& entry : doc.at("edges")) {
        std::ostringstream label;
        label << "edge " << entry.value("a", nlohmann::json()).dump() << "-"
              << entry.value("b", nlohmann::json()).dump();
        bool shape_ok = true;
        for (const char* key : {"a", "b", "phi", "theta_ab", "theta_ba", "d"}) {
            if (!entry.contains(key) || !entry.at(key).is_number()) {
                issues.push_back(label.str() + ": missing numeric field \"" + key + "\"");
                shape_ok = false;
            }
        }
        if (!shape_ok) continue;
        const int a = entry.at("a").get<int>();
        const int b = entry.at("b").get<int>();
        if (!nodes.count(a) || !nodes.count(b))
            issues.push_back(label.str() + ": endpoints must be listed nodes");
        if (a == b) issues.push_back(label.str() + ": self-edges are undefined");
        const double d = entry.at("d").get<double>();
        if (d < 0.0) issues.push_back(label.str() + ": negative distance");
        const Edge edge{Angle(entry.at("phi").get<double>()),
                        Angle(entry.at("theta_ab").get<double>()),
                        Angle(entry.at("theta_ba").get<double>()), std::max(d, 0.0)};
        if (edge_invariant_residual(edge) > kLoadInvariantTolerance) {
            std::ostringstream msg;
            msg << label.str() << ": phi breaks the edge invariant by "
                << edge_invariant_residual(edge) << " rad";
            issues.push_back(msg.str());
        }
    }
    return issues;
}

inline MarkerGraph graph_from_json(const nlohmann::json& doc) {
    const std::vector<std::string> issues = validate_graph_json(doc);
    if (!issues.empty()) throw ValidationError(issues.front());
    MarkerGraph graph;
    for (const nlohmann::json& n : doc.at("nodes")) graph.add_node(n.get<int>());
    for (const nlohmann::json& entry : doc.at("edges")) {
        // Stored verbatim so a save/load cycle is the identity.
        graph.add_edge(entry.at("a").get<int>(), entry.at("b").get<int>(),
                       Edge{Angle(entry.at("phi").get<double>()),
                            Angle(entry.at("theta_ab").get<double>()),
                            Angle(entry.at("theta_ba").get<double>()),
                            entry.at("d").get<double>()});
    }
    if (doc.contains("home") && !doc.at("home").is_null())
        graph.set_home(doc.at("home").get<int>());
    return graph;
}

inline MarkerGraph load_graph(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("map: invalid JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

inline void save_graph(const MarkerGraph& graph, std::ostream& out) {
    out << graph_to_json(graph).dump(2) << '\n';
}

/// Graphviz view of the map: one node per marker, edges labeled with
/// distance and phase difference.
inline void write_dot(const MarkerGraph& graph, std::ostream& out) {
    out << "graph marker_map {\n";
    out << "  node [shape=circle];\n";
    for (int id : graph.nodes()) out << "  " << id << ";\n";
    out << std::fixed;
    for (const auto& [key, edge] : graph.edges()) {
        out << "  " << key.first << " -- " << key.second << " [label=\"d="
            << std::setprecision(3) << edge.dist << "m, phi=" << std::setprecision(2)
            << edge.phi.degrees() << "deg\"];\n";
    }
    out << "}\n";
}

}  // namespace marknav
