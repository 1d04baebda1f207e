#pragma once
// MP state-transition graphs per gesture group with canonical/inverse edge
// annotation, DOT and JSON emission.

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpscope/inverse.hpp"
#include "mpscope/model.hpp"
#include "mpscope/seqops.hpp"

namespace mpscope {

inline constexpr std::string_view kStartNode = "START";
inline constexpr std::string_view kEndNode = "END";

struct StateEdge {
    std::string from;
    std::string to;
    long long count = 0;
    bool canonical = false;
    bool inverse = false;

    auto operator<=>(const StateEdge&) const = default;
};

// Nodes are MP labels without frames, plus synthetic START and END. Node
// order is START, interior labels sorted, END; edges follow node order.
struct StateGraph {
    std::string name;
    std::vector<std::string> nodes;
    std::vector<StateEdge> edges;
};

namespace detail {

inline int node_rank(std::string_view n) {
    if (n == kStartNode) return 0;
    if (n == kEndNode) return 2;
    return 1;
}

inline bool node_less(const std::string& a, const std::string& b) {
    const int ra = node_rank(a), rb = node_rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
}

inline bool edge_less(const StateEdge& a, const StateEdge& b) {
    if (a.from != b.from) return node_less(a.from, b.from);
    return node_less(a.to, b.to);
}

}  // namespace detail

/// Accumulates transitions START -> mp1 -> ... -> mpk -> END for every
/// sequence; an empty sequence contributes START -> END. The START out-count
/// total equals the number of sequences, and interior nodes conserve flow.
inline StateGraph build_state_graph(std::span<const MPSequence> sequences,
                                    std::string name = {}) {
    std::map<std::pair<std::string, std::string>, long long> counts;
    std::set<std::string> interior;
    for (const auto& seq : sequences) {
        std::string prev(kStartNode);
        for (const auto& mp : seq.mps) {
            std::string label = mp_label(mp);
            ++counts[{prev, label}];
            interior.insert(label);
            prev = std::move(label);
        }
        ++counts[{prev, std::string(kEndNode)}];
    }

    StateGraph g;
    g.name = std::move(name);
    g.nodes.push_back(std::string(kStartNode));
    for (const auto& n : interior) g.nodes.push_back(n);
    g.nodes.push_back(std::string(kEndNode));
    for (const auto& [key, count] : counts) g.edges.push_back({key.first, key.second, count});
    std::sort(g.edges.begin(), g.edges.end(), detail::edge_less);
    return g;
}

/// Flags canonical-chain edges (consecutive pattern elements) and inverse
/// edges (endpoints forming a negating channel pair, or the needle
/// push-then-pull pair, with the type among the given keys when any are
/// given). The flags are disjoint; canonical wins ties.
inline StateGraph annotate_graph(StateGraph g, const CanonicalEntry* canonical,
                                 std::span<const InverseTypeKey> inverse_types) {
    std::set<std::pair<std::string, std::string>> chain;
    if (canonical) {
        for (std::size_t i = 0; i + 1 < canonical->pattern.size(); ++i)
            chain.insert({mp_label(canonical->pattern[i]), mp_label(canonical->pattern[i + 1])});
    }
    auto inverse_type_of = [](const MpTriple& a,
                              const MpTriple& b) -> std::optional<InverseTypeKey> {
        if (channel_of(a) == channel_of(b)) {
            auto inv = verb_inverse(a.verb);
            if (inv && *inv == b.verb) {
                Verb v1 = a.verb, v2 = b.verb;
                if (static_cast<int>(v2) < static_cast<int>(v1)) std::swap(v1, v2);
                return InverseTypeKey{InverseTypeKey::Kind::ChannelPair, v1, v2, a.actor,
                                      object_class(a.object)};
            }
        }
        MotionPrimitive ma{a.verb, a.actor, a.object, 0, 0};
        MotionPrimitive mb{b.verb, b.actor, b.object, 0, 0};
        if (is_push_needle_into_target(ma) && is_pull_needle_by_tool(mb))
            return InverseTypeKey{InverseTypeKey::Kind::PushPull, Verb::Push, Verb::Pull, b.actor,
                                  object_class(a.object)};
        return std::nullopt;
    };
    for (auto& e : g.edges) {
        e.canonical = chain.count({e.from, e.to}) > 0;
        e.inverse = false;
        if (e.canonical) continue;
        auto a = parse_mp_triple(e.from);
        auto b = parse_mp_triple(e.to);
        if (!a || !b) continue;
        auto type = inverse_type_of(*a, *b);
        if (!type) continue;
        if (inverse_types.empty()) {
            e.inverse = true;
        } else {
            for (const auto& want : inverse_types)
                if (want == *type) { e.inverse = true; break; }
        }
    }
    return g;
}

/// Drops edges below the count threshold, then interior nodes left with no
/// edges. START and END always remain.
inline StateGraph prune_edges(StateGraph g, long long min_count) {
    std::vector<StateEdge> kept;
    for (auto& e : g.edges)
        if (e.count >= min_count) kept.push_back(std::move(e));
    g.edges = std::move(kept);
    std::set<std::string> used;
    for (const auto& e : g.edges) {
        used.insert(e.from);
        used.insert(e.to);
    }
    std::vector<std::string> nodes;
    for (auto& n : g.nodes)
        if (n == kStartNode || n == kEndNode || used.count(n)) nodes.push_back(std::move(n));
    g.nodes = std::move(nodes);
    return g;
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace detail

/// Deterministic DOT rendering: nodes then edges in graph order, with edge
/// labels carrying counts and colors green/red/black for canonical, inverse,
/// and plain edges.
inline std::string emit_dot(const StateGraph& g) {
    std::string out = "digraph \"" + detail::dot_escape(g.name.empty() ? "mpscope" : g.name) +
                      "\" {\n";
    out += "    rankdir=LR;\n";
    for (const auto& n : g.nodes) {
        out += "    \"" + detail::dot_escape(n) + "\"";
        if (n == kStartNode || n == kEndNode) out += " [shape=box]";
        out += ";\n";
    }
    for (const auto& e : g.edges) {
        const char* color = e.canonical ? "green" : (e.inverse ? "red" : "black");
        out += "    \"" + detail::dot_escape(e.from) + "\" -> \"" + detail::dot_escape(e.to) +
               "\" [label=\"" + std::to_string(e.count) + "\", color=\"" + color + "\"];\n";
    }
    out += "}\n";
    return out;
}

/// JSON mirror of the graph: nodes, edges with counts and flags.
inline std::string emit_graph_json(const StateGraph& g) {
    nlohmann::json j;
    j["name"] = g.name;
    j["nodes"] = g.nodes;
    j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges) {
        j["edges"].push_back({{"from", e.from},
                              {"to", e.to},
                              {"count", e.count},
                              {"canonical", e.canonical},
                              {"inverse", e.inverse}});
    }
    return j.dump(2) + "\n";
}

}  // namespace mpscope
