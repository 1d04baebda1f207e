#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include <mpscope/ingest.hpp>

#include "support/generators.hpp"

using namespace mpscope;

TEST_CASE("gesture transcript parsing") {
    auto gestures = parse_gesture_transcript("10 95 G1\n96 200 G3\n\n201 300 G6\n");
    REQUIRE(gestures.size() == 3);
    CHECK(gestures[0].id == GestureId{1});
    CHECK(gestures[0].start_frame == 10);
    CHECK(gestures[0].end_frame == 95);
    CHECK(gestures[1].ordinal == 1);
    CHECK(gestures[2].ordinal == 2);

    SECTION("round trip") {
        CHECK(parse_gesture_transcript(render_gesture_transcript(gestures)).size() == 3);
        CHECK(render_gesture_transcript(gestures) == "10 95 G1\n96 200 G3\n201 300 G6\n");
    }
}

TEST_CASE("gesture transcript errors carry line numbers") {
    try {
        parse_gesture_transcript("10 95 G1\n96 G3\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::malformed_line);
        CHECK(e.line() == 2);
    }

    CHECK_THROWS_AS(parse_gesture_transcript("10 95 G16\n"), Error);
    CHECK_THROWS_AS(parse_gesture_transcript("10 95 G1\n90 120 G2\n"), Error);  // overlap
    CHECK_THROWS_AS(parse_gesture_transcript("95 10 G1\n"), Error);             // end < start
    try {
        parse_gesture_transcript("1 5 G1\n3 9 G2\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::overlap);
    }
}

TEST_CASE("mp transcript parsing") {
    const std::string text =
        "5 20 Grasp(L, Needle)\n"
        "10 30 Touch(R, Thread)\n"
        "21 40 Pull(L, Needle)\n"
        "15 25 Push(Needle, Fabric)\n";
    auto mps = parse_mp_transcript(text);
    REQUIRE(mps.size() == 4);
    // Sorted by start frame.
    CHECK(mps[0].start_frame == 5);
    CHECK(mps[1].start_frame == 10);
    CHECK(mps[2].start_frame == 15);
    CHECK(mps[2].actor == Actor::of_object(TargetObject::needle()));
    CHECK(mps[3].verb == Verb::Pull);

    SECTION("round trip") {
        auto again = parse_mp_transcript(render_mp_transcript(mps));
        CHECK(again == mps);
    }
}

TEST_CASE("mp transcript errors") {
    try {
        parse_mp_transcript("5 20 Poke(L, Needle)\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_verb);
        CHECK(e.line() == 1);
    }

    try {
        parse_mp_transcript("1 9 Grasp(L, Needle)\n5 12 Pull(L, Needle)\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::same_channel_overlap);
        CHECK(e.line() == 2);
    }

    // Overlap on distinct channels is fine.
    CHECK_NOTHROW(parse_mp_transcript("1 9 Grasp(L, Needle)\n5 12 Pull(R, Needle)\n"));
    CHECK_THROWS_AS(parse_mp_transcript("1 Grasp(L, Needle)\n"), Error);
    CHECK_THROWS_AS(parse_mp_transcript("9 1 Grasp(L, Needle)\n"), Error);
}

TEST_CASE("random transcripts round-trip through render and parse") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 50; ++it) {
        auto mps = gen::random_transcript_mps(rng, 1 + gen::draw(rng, 40));
        sort_trial_mps(mps);
        auto again = parse_mp_transcript(render_mp_transcript(mps));
        REQUIRE(again == mps);
    }
}

TEST_CASE("metadata csv parsing") {
    const std::string text =
        "task,subject,trial,skill,grs_total,respect_for_tissue,suture_needle_handling,"
        "time_and_motion,flow_of_operation,overall_performance,quality_of_final_product,fps\n"
        "Suturing,C,2,N,18,3,3,3,3,3,3,30\n"
        "KnotTying,H,1,expert,27,5,4,5,4,5,4,25\n";
    auto records = parse_metadata_csv(text);
    REQUIRE(records.size() == 2);
    CHECK(records[0].task == Task::Suturing);
    CHECK(records[0].subject == "C");
    CHECK(records[0].trial_index == 2);
    CHECK(records[0].skill == Skill::Novice);
    CHECK(records[0].grs_total == 18);
    CHECK(records[0].subscores[0] == 3);
    CHECK(records[0].fps == 30);
    CHECK(records[1].skill == Skill::Expert);
    CHECK(records[1].fps == 25);

    SECTION("round trip") {
        auto again = parse_metadata_csv(render_metadata_csv(records));
        REQUIRE(again.size() == 2);
        CHECK(again[0] == records[0]);
        CHECK(again[1] == records[1]);
    }

    SECTION("fps column optional") {
        const std::string no_fps =
            "task,subject,trial,skill,grs_total,respect_for_tissue,suture_needle_handling,"
            "time_and_motion,flow_of_operation,overall_performance,quality_of_final_product\n"
            "S,B,1,I,20,4,3,3,4,3,3\n";
        auto r = parse_metadata_csv(no_fps);
        REQUIRE(r.size() == 1);
        CHECK(r[0].fps == 30);
        CHECK(r[0].task == Task::Suturing);
    }
}

TEST_CASE("metadata csv errors") {
    const std::string header =
        "task,subject,trial,skill,grs_total,respect_for_tissue,suture_needle_handling,"
        "time_and_motion,flow_of_operation,overall_performance,quality_of_final_product\n";

    try {
        parse_metadata_csv("task,subject\nS,B\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::missing_column);
    }

    try {
        parse_metadata_csv(header + "S,B,1,wizard,20,4,3,3,4,3,3\n");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::bad_skill_code);
        CHECK(e.line() == 2);
    }

    CHECK_THROWS_AS(parse_metadata_csv(header + "S,B,one,N,20,4,3,3,4,3,3\n"), Error);
    CHECK_THROWS_AS(parse_metadata_csv(header + "S,B,1,N\n"), Error);
}

TEST_CASE("dataset scan assembles complete trials and reports issues") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "mpscope_scan_test";
    fs::remove_all(root);

    write_text_file(root / "Suturing" / "gestures" / "B_1.txt", "1 50 G1\n51 120 G3\n");
    write_text_file(root / "Suturing" / "motion_primitives" / "B_1.txt",
                    "5 20 Grasp(L, Needle)\n60 80 Pull(L, Needle)\n");
    // Gesture file without MP file.
    write_text_file(root / "Suturing" / "gestures" / "C_1.txt", "1 50 G1\n");
    write_text_file(root / "meta.csv",
                    "task,subject,trial,skill,grs_total,respect_for_tissue,"
                    "suture_needle_handling,time_and_motion,flow_of_operation,"
                    "overall_performance,quality_of_final_product\n"
                    "Suturing,B,1,N,18,3,3,3,3,3,3\n"
                    "Suturing,C,1,N,19,3,3,3,4,3,3\n"
                    "Suturing,D,1,I,22,4,4,4,3,4,3\n");

    Corpus corpus = scan_dataset(root);
    REQUIRE(corpus.trials.size() == 1);
    CHECK(corpus.trials[0].id().str() == "Suturing_B_1");
    CHECK(corpus.trials[0].gestures.size() == 2);
    CHECK(corpus.trials[0].mps.size() == 2);
    CHECK(corpus.trials[0].record.skill == Skill::Novice);

    REQUIRE(corpus.issues.size() == 2);
    CHECK(corpus.issues[0].trial_id == "Suturing_C_1");
    CHECK(corpus.issues[0].reason.find("mp-transcript") != std::string::npos);
    CHECK(corpus.issues[1].trial_id == "Suturing_D_1");
    CHECK(corpus.issues[1].reason.find("gesture-transcript") != std::string::npos);

    SECTION("parse failures become issues, not aborts") {
        write_text_file(root / "Suturing" / "motion_primitives" / "C_1.txt",
                        "1 10 Poke(L, Needle)\n");
        Corpus again = scan_dataset(root);
        REQUIRE(again.trials.size() == 1);
        bool found = false;
        for (const auto& issue : again.issues)
            if (issue.trial_id == "Suturing_C_1" &&
                issue.reason.find("UnknownVerb") != std::string::npos)
                found = true;
        CHECK(found);
    }

    CHECK_THROWS_AS(scan_dataset(root / "nope"), Error);
    fs::remove_all(root);
}
