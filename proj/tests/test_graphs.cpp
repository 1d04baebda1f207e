#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include <json.hpp>
#include <mpscope/graphs.hpp>

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace mpscope;

namespace {

const Actor L = Actor::tool_l();
const Actor R = Actor::tool_r();
const TargetObject N = TargetObject::needle();

MPSequence seq_of(std::vector<MotionPrimitive> mps) {
    MPSequence s;
    s.trial = {Task::Suturing, "B", 1};
    s.gesture = {GestureId{6}, 1, 1000, 0};
    s.mps = std::move(mps);
    return s;
}

long long edge_count(const StateGraph& g, const std::string& from, const std::string& to) {
    for (const auto& e : g.edges)
        if (e.from == from && e.to == to) return e.count;
    return -1;
}

const StateEdge* find_edge(const StateGraph& g, const std::string& from, const std::string& to) {
    for (const auto& e : g.edges)
        if (e.from == from && e.to == to) return &e;
    return nullptr;
}

}  // namespace

TEST_CASE("graph accumulates transition counts") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Release, R, N, 6, 9}, {Verb::Pull, L, N, 10, 14}}),
        seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Release, R, N, 6, 9}, {Verb::Pull, L, N, 10, 14}}),
        seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Pull, L, N, 6, 9}}),
    };
    auto g = build_state_graph(seqs, "demo");
    CHECK(g.name == "demo");
    REQUIRE(g.nodes.size() == 5);
    CHECK(g.nodes.front() == "START");
    CHECK(g.nodes.back() == "END");
    CHECK(g.nodes[1] == "Grasp(L, Needle)");  // interior sorted

    CHECK(edge_count(g, "START", "Grasp(L, Needle)") == 3);
    CHECK(edge_count(g, "Grasp(L, Needle)", "Release(R, Needle)") == 2);
    CHECK(edge_count(g, "Release(R, Needle)", "Pull(L, Needle)") == 2);
    CHECK(edge_count(g, "Grasp(L, Needle)", "Pull(L, Needle)") == 1);
    CHECK(edge_count(g, "Pull(L, Needle)", "END") == 3);
    CHECK(g.edges.front().from == "START");  // edge order follows node order
}

TEST_CASE("empty sequences contribute a START to END edge") {
    std::vector<MPSequence> seqs = {seq_of({}), seq_of({{Verb::Grasp, L, N, 1, 5}})};
    auto g = build_state_graph(seqs);
    CHECK(edge_count(g, "START", "END") == 1);
    CHECK(edge_count(g, "START", "Grasp(L, Needle)") == 1);
    CHECK(edge_count(g, "Grasp(L, Needle)", "END") == 1);
}

TEST_CASE("flow conservation on random sequence groups") {
    std::mt19937_64 rng(31337);
    for (int it = 0; it < 60; ++it) {
        std::vector<MPSequence> seqs;
        const std::size_t count = 1 + gen::draw(rng, 12);
        for (std::size_t i = 0; i < count; ++i)
            seqs.push_back(seq_of(gen::random_merged_sequence(rng, gen::draw(rng, 12))));
        auto g = build_state_graph(seqs);

        std::map<std::string, long long> in, out;
        for (const auto& e : g.edges) {
            out[e.from] += e.count;
            in[e.to] += e.count;
        }
        REQUIRE(out["START"] == static_cast<long long>(seqs.size()));
        REQUIRE(in["END"] == static_cast<long long>(seqs.size()));
        REQUIRE(in["START"] == 0);
        REQUIRE(out["END"] == 0);
        for (const auto& n : g.nodes)
            if (n != "START" && n != "END") REQUIRE(in[n] == out[n]);
    }
}

TEST_CASE("annotation flags canonical chains and inverse pairs") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Grasp, L, N, 1, 5},
                {Verb::Release, R, N, 6, 9},
                {Verb::Pull, L, N, 10, 14},
                {Verb::Touch, L, N, 15, 19},
                {Verb::Untouch, L, N, 20, 24}}),
    };
    auto g = build_state_graph(seqs);
    const CanonicalEntry* g6 = find_canonical(builtin_canonical_table(), Task::Suturing,
                                              GestureId{6});
    g = annotate_graph(std::move(g), g6, {});

    const StateEdge* chain1 = find_edge(g, "Grasp(L, Needle)", "Release(R, Needle)");
    REQUIRE(chain1 != nullptr);
    CHECK(chain1->canonical);
    CHECK_FALSE(chain1->inverse);
    const StateEdge* chain2 = find_edge(g, "Release(R, Needle)", "Pull(L, Needle)");
    REQUIRE(chain2 != nullptr);
    CHECK(chain2->canonical);

    const StateEdge* inv = find_edge(g, "Touch(L, Needle)", "Untouch(L, Needle)");
    REQUIRE(inv != nullptr);
    CHECK(inv->inverse);
    CHECK_FALSE(inv->canonical);

    const StateEdge* plain = find_edge(g, "Pull(L, Needle)", "Touch(L, Needle)");
    REQUIRE(plain != nullptr);
    CHECK_FALSE(plain->canonical);
    CHECK_FALSE(plain->inverse);

    SECTION("canonical wins when an edge is both") {
        CanonicalEntry entry{Task::Suturing, GestureId{1},
                             {{Verb::Grasp, L, N}, {Verb::Release, L, N}}};
        std::vector<MPSequence> both = {
            seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Release, L, N, 6, 9}})};
        auto gb = annotate_graph(build_state_graph(both), &entry, {});
        const StateEdge* e = find_edge(gb, "Grasp(L, Needle)", "Release(L, Needle)");
        REQUIRE(e != nullptr);
        CHECK(e->canonical);
        CHECK_FALSE(e->inverse);
    }

    SECTION("restricting inverse types filters the flag") {
        std::vector<InverseTypeKey> only_r = {
            {InverseTypeKey::Kind::ChannelPair, Verb::Touch, Verb::Untouch, R,
             object_class(N)}};
        auto gr = annotate_graph(build_state_graph(seqs), g6, only_r);
        const StateEdge* e = find_edge(gr, "Touch(L, Needle)", "Untouch(L, Needle)");
        REQUIRE(e != nullptr);
        CHECK_FALSE(e->inverse);
    }
}

TEST_CASE("push-pull edges count as inverse") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Push, Actor::of_object(N), TargetObject::fabric(), 1, 5},
                {Verb::Pull, R, N, 6, 9}}),
    };
    auto g = annotate_graph(build_state_graph(seqs), nullptr, {});
    const StateEdge* e = find_edge(g, "Push(Needle, Fabric)", "Pull(R, Needle)");
    REQUIRE(e != nullptr);
    CHECK(e->inverse);
}

TEST_CASE("pruning drops light edges and orphaned nodes but keeps START and END") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Pull, L, N, 6, 9}}),
        seq_of({{Verb::Grasp, L, N, 1, 5}, {Verb::Pull, L, N, 6, 9}}),
        seq_of({{Verb::Touch, R, N, 1, 5}}),
    };
    auto g = prune_edges(build_state_graph(seqs), 2);
    CHECK(edge_count(g, "START", "Grasp(L, Needle)") == 2);
    CHECK(find_edge(g, "START", "Touch(R, Needle)") == nullptr);
    bool touch_node = false;
    for (const auto& n : g.nodes)
        if (n == "Touch(R, Needle)") touch_node = true;
    CHECK_FALSE(touch_node);

    auto empty = prune_edges(build_state_graph(seqs), 100);
    CHECK(empty.edges.empty());
    REQUIRE(empty.nodes.size() == 2);
    CHECK(empty.nodes[0] == "START");
    CHECK(empty.nodes[1] == "END");
}

TEST_CASE("dot emission round-trips through a reader") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Grasp, L, N, 1, 5},
                {Verb::Release, R, N, 6, 9},
                {Verb::Pull, L, N, 10, 14},
                {Verb::Touch, L, N, 15, 19},
                {Verb::Untouch, L, N, 20, 24}}),
        seq_of({}),
    };
    const CanonicalEntry* g6 = find_canonical(builtin_canonical_table(), Task::Suturing,
                                              GestureId{6});
    auto g = annotate_graph(build_state_graph(seqs, "Suturing_G6_Novice"), g6, {});
    const std::string dot = emit_dot(g);

    CHECK(dot == emit_dot(g));  // deterministic
    CHECK(dot.find("digraph \"Suturing_G6_Novice\"") == 0);
    CHECK(dot.find("rankdir=LR") != std::string::npos);

    auto parsed = oracle::parse_dot(dot);
    CHECK(parsed.nodes.size() == g.nodes.size());
    REQUIRE(parsed.edges.size() == g.edges.size());
    std::map<std::pair<std::string, std::string>, std::pair<long long, std::string>> got;
    for (const auto& e : parsed.edges) got[{e.from, e.to}] = {e.count, e.color};
    for (const auto& e : g.edges) {
        auto it = got.find({e.from, e.to});
        REQUIRE(it != got.end());
        CHECK(it->second.first == e.count);
        const std::string want = e.canonical ? "green" : (e.inverse ? "red" : "black");
        CHECK(it->second.second == want);
    }
}

TEST_CASE("json emission carries nodes, counts, and flags") {
    std::vector<MPSequence> seqs = {
        seq_of({{Verb::Touch, L, N, 1, 5}, {Verb::Untouch, L, N, 6, 9}})};
    auto g = annotate_graph(build_state_graph(seqs, "demo"), nullptr, {});
    auto j = nlohmann::json::parse(emit_graph_json(g));
    CHECK(j["name"] == "demo");
    REQUIRE(j["nodes"].size() == 4);
    REQUIRE(j["edges"].size() == 3);
    bool saw_inverse = false;
    for (const auto& e : j["edges"])
        if (e["from"] == "Touch(L, Needle)" && e["to"] == "Untouch(L, Needle)") {
            CHECK(e["count"] == 1);
            CHECK(e["inverse"] == true);
            CHECK(e["canonical"] == false);
            saw_inverse = true;
        }
    CHECK(saw_inverse);
}
