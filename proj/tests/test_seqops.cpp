#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include <mpscope/seqops.hpp>

#include "support/generators.hpp"

using namespace mpscope;

namespace {

const Actor L = Actor::tool_l();
const Actor R = Actor::tool_r();
const TargetObject N = TargetObject::needle();

std::map<ChannelKey, std::set<Frame>> covered_frames(std::span<const MotionPrimitive> mps) {
    std::map<ChannelKey, std::set<Frame>> out;
    for (const auto& mp : mps)
        for (Frame f = mp.start_frame; f <= mp.end_frame; ++f) out[channel_of(mp)].insert(f);
    return out;
}

bool has_forbidden_adjacency(std::span<const MotionPrimitive> mps) {
    std::map<ChannelKey, Verb> last;
    for (const auto& mp : mps) {
        auto it = last.find(channel_of(mp));
        if (it != last.end()) {
            if (it->second == Verb::Touch && mp.verb == Verb::Grasp) return true;
            if (it->second == Verb::Release && mp.verb == Verb::Untouch) return true;
        }
        last[channel_of(mp)] = mp.verb;
    }
    return false;
}

}  // namespace

TEST_CASE("touch-grasp merge on one channel") {
    std::vector<MotionPrimitive> mps = {
        {Verb::Touch, L, N, 10, 19},
        {Verb::Grasp, L, N, 20, 35},
    };
    auto merged = merge_touch_grasp(mps);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].verb == Verb::Grasp);
    CHECK(merged[0].start_frame == 10);
    CHECK(merged[0].end_frame == 35);
}

TEST_CASE("release-untouch merge keeps the release") {
    std::vector<MotionPrimitive> mps = {
        {Verb::Release, R, N, 5, 9},
        {Verb::Untouch, R, N, 10, 12},
    };
    auto merged = merge_touch_grasp(mps);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].verb == Verb::Release);
    CHECK(merged[0].start_frame == 5);
    CHECK(merged[0].end_frame == 12);
}

TEST_CASE("interleaved MPs on other channels do not block a merge") {
    std::vector<MotionPrimitive> mps = {
        {Verb::Touch, L, N, 10, 19},
        {Verb::Pull, R, N, 12, 30},
        {Verb::Grasp, L, N, 20, 35},
    };
    auto merged = merge_touch_grasp(mps);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].verb == Verb::Grasp);
    CHECK(merged[0].start_frame == 10);
    CHECK(merged[1].verb == Verb::Pull);
}

TEST_CASE("merge chains collapse fully") {
    std::vector<MotionPrimitive> mps = {
        {Verb::Touch, L, N, 1, 5},
        {Verb::Touch, L, N, 6, 9},
        {Verb::Grasp, L, N, 10, 15},
    };
    auto merged = merge_touch_grasp(mps);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].verb == Verb::Grasp);
    CHECK(merged[0].start_frame == 1);
    CHECK(merged[0].end_frame == 15);
}

TEST_CASE("merge absorbs a same-channel gap between the pair") {
    // The merged MP spans [touch.start, grasp.end]; frames in between that
    // neither MP covered become covered. Generators used by the coverage
    // property therefore emit contiguous channels.
    std::vector<MotionPrimitive> mps = {
        {Verb::Touch, L, N, 1, 5},
        {Verb::Grasp, L, N, 20, 30},
    };
    auto merged = merge_touch_grasp(mps);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start_frame == 1);
    CHECK(merged[0].end_frame == 30);
}

TEST_CASE("merge that crosses different verbs or channels never fires") {
    std::vector<MotionPrimitive> mps = {
        {Verb::Grasp, L, N, 1, 5},   {Verb::Touch, L, N, 6, 9},
        {Verb::Touch, R, N, 10, 12}, {Verb::Grasp, R, TargetObject::thread(), 13, 15},
    };
    CHECK(merge_touch_grasp(mps) == mps);
}

TEST_CASE("merge properties on random transcripts") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 300; ++it) {
        auto mps = gen::random_transcript_mps(rng, 1 + gen::draw(rng, 50));
        sort_trial_mps(mps);
        auto before = covered_frames(mps);
        auto merged = merge_touch_grasp(mps);

        REQUIRE(merge_touch_grasp(merged) == merged);          // idempotent
        REQUIRE(covered_frames(merged) == before);             // coverage preserved
        REQUIRE_FALSE(has_forbidden_adjacency(merged));        // post-condition
        REQUIRE(merged.size() <= mps.size());
    }
}

TEST_CASE("merged sequences are fixpoints") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 100; ++it) {
        auto mps = gen::random_merged_sequence(rng, 1 + gen::draw(rng, 40));
        REQUIRE(merge_touch_grasp(mps) == mps);
    }
}

TEST_CASE("extraction includes straddlers in both neighbors") {
    TrialData trial;
    trial.record.task = Task::Suturing;
    trial.record.subject = "B";
    trial.record.trial_index = 1;
    trial.gestures = {
        {GestureId{3}, 1, 100, 0},
        {GestureId{6}, 101, 200, 1},
        {GestureId{4}, 201, 300, 2},
    };
    trial.mps = {
        {Verb::Touch, L, N, 5, 50},     // inside G3
        {Verb::Grasp, L, N, 95, 110},   // straddles G3 -> G6
        {Verb::Pull, L, N, 120, 180},   // inside G6
        {Verb::Grasp, R, N, 200, 210},  // straddles G6 -> G4 (touches both ends)
        {Verb::Release, L, N, 290, 300},
    };
    auto seqs = extract_sequences(trial);
    REQUIRE(seqs.size() == 3);
    CHECK(seqs[0].mps.size() == 2);  // Touch + straddling Grasp
    CHECK(seqs[1].mps.size() == 3);  // straddler, Pull, second straddler
    CHECK(seqs[2].mps.size() == 2);
    CHECK(seqs[1].mps.front().start_frame == 95);
    CHECK(seqs[1].mps.back().start_frame == 200);
    CHECK(seqs[0].gesture.id == GestureId{3});
    CHECK(seqs[0].trial.str() == "Suturing_B_1");
}

TEST_CASE("every MP lands in at least one sequence when gestures span the timeline") {
    std::mt19937_64 rng(123);
    for (int it = 0; it < 50; ++it) {
        auto trial = gen::random_trial(rng, 1 + gen::draw(rng, 40), 1 + gen::draw(rng, 6));
        trial.mps = merge_touch_grasp(trial.mps);
        auto seqs = extract_sequences(trial);
        std::size_t placed = 0;
        for (const auto& mp : trial.mps) {
            bool found = false;
            for (const auto& s : seqs)
                for (const auto& m : s.mps)
                    if (m == mp) found = true;
            if (found) ++placed;
        }
        REQUIRE(placed == trial.mps.size());
    }
}

TEST_CASE("sequence keys and histograms") {
    MPSequence empty{{Task::Suturing, "B", 1}, {GestureId{1}, 1, 10, 0}, {}};
    CHECK(sequence_key(empty) == "∅");

    MPSequence one{{Task::Suturing, "B", 1},
                   {GestureId{6}, 1, 10, 0},
                   {{Verb::Grasp, L, N, 1, 4}, {Verb::Pull, L, N, 5, 9}}};
    CHECK(sequence_key(one) == "Grasp(L, Needle), Pull(L, Needle)");

    std::vector<MPSequence> seqs = {one, one, empty};
    seqs[2].gesture.id = GestureId{6};
    auto hist = sequence_histogram(seqs, Task::Suturing, GestureId{6});
    REQUIRE(hist.size() == 2);
    CHECK(hist[0].first == "Grasp(L, Needle), Pull(L, Needle)");
    CHECK(hist[0].second == 2);
    CHECK(hist[1].second == 1);
    int total = 0;
    for (const auto& [key, count] : hist) total += count;
    CHECK(total == 3);

    CHECK(sequence_histogram(seqs, Task::KnotTying, GestureId{6}).empty());
}
