#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include <json.hpp>
#include <mpscope/report.hpp>

using namespace mpscope;

namespace {

AggregateTable demo_table() {
    AggregateTable t;
    t.name = "demo";
    t.title = "Demo table";
    t.row_header = "Type";
    t.columns = {"G2", "Total"};
    t.row_keys = {"Touch, Untouch", "Grasp, Release"};
    t.cells = {{Cell::of_count(3), Cell::ratio(1, 3)},
               {Cell::empty(), Cell::real(-0.654)}};
    return t;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(fmt_fixed(1.005, 2) == "1.00");
    CHECK(fmt_fixed(-0.654, 2) == "-0.65");
    CHECK(fmt_fixed(-0.0001, 2) == "0.00");
    CHECK(fmt_rho(-0.6512) == "-0.65");
    CHECK(fmt_pct(17.34) == "17.3");
    CHECK(fmt_p(0.0004) == "<0.001");
    CHECK(fmt_p(0.087) == "0.087");
    CHECK(fmt_p(0.75) == "0.750");
}

TEST_CASE("cell text variants") {
    CHECK(cell_text(Cell::empty()) == "-");
    CHECK(cell_text(Cell::of_count(12)) == "12");
    CHECK(cell_text(Cell::ratio(1, 3)) == "1/3 (33.3%)");
    CHECK(cell_text(Cell::real(-0.654)) == "-0.65");
    CHECK(cell_text(Cell::pvalue(0.0001)) == "<0.001");
}

TEST_CASE("csv rendering quotes and blanks") {
    auto csv = table_to_csv(demo_table());
    CHECK(csv ==
          "Type,G2,Total\n"
          "\"Touch, Untouch\",3,1/3 (33.3%)\n"
          "\"Grasp, Release\",,-0.65\n");
}

TEST_CASE("markdown rendering") {
    auto md = table_to_md(demo_table());
    CHECK(md.rfind("# Demo table\n\n", 0) == 0);
    CHECK(md.find("| Type | G2 | Total |") != std::string::npos);
    CHECK(md.find("| --- | --- | --- |") != std::string::npos);
    CHECK(md.find("| Grasp, Release | - | -0.65 |") != std::string::npos);
}

TEST_CASE("json rendering keeps full precision") {
    auto j = nlohmann::json::parse(table_to_json(demo_table()));
    CHECK(j["name"] == "demo");
    CHECK(j["columns"] == nlohmann::json({"G2", "Total"}));
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["cells"][0] == 3);
    CHECK(j["rows"][0]["cells"][1]["num"] == 1);
    CHECK(j["rows"][0]["cells"][1]["den"] == 3);
    CHECK(j["rows"][0]["cells"][1]["percent"].get<double>() == Catch::Approx(100.0 / 3));
    CHECK(j["rows"][1]["cells"][0].is_null());
    CHECK(j["rows"][1]["cells"][1].get<double>() == Catch::Approx(-0.654));
}

TEST_CASE("format list parsing") {
    auto all = parse_format_list("csv,json,md");
    REQUIRE(all.has_value());
    REQUIRE(all->size() == 3);
    CHECK((*all)[0] == OutputFormat::Csv);
    CHECK((*all)[2] == OutputFormat::Md);
    CHECK(parse_format_list("csv")->size() == 1);
    CHECK_FALSE(parse_format_list("csv,bogus").has_value());
    CHECK_FALSE(parse_format_list("").has_value());
    CHECK_FALSE(parse_output_format("CSV").has_value());
}

TEST_CASE("write_table emits one file per format") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mpscope_report_test" / "tables";
    fs::remove_all(dir.parent_path());
    const OutputFormat formats[] = {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Md};
    write_table(demo_table(), dir, formats);
    CHECK(fs::exists(dir / "demo.csv"));
    CHECK(fs::exists(dir / "demo.json"));
    CHECK(fs::exists(dir / "demo.md"));
    CHECK(read_text_file(dir / "demo.csv") == table_to_csv(demo_table()));
    fs::remove_all(dir.parent_path());
}

TEST_CASE("clip index rows are sorted and fps-aware") {
    TrialRecord rec;
    rec.task = Task::Suturing;
    rec.subject = "B";
    rec.trial_index = 1;
    rec.skill = Skill::Novice;
    rec.fps = 25;

    InverseTypeKey type;
    type.kind = InverseTypeKey::Kind::ChannelPair;
    type.first_verb = Verb::Touch;
    type.second_verb = Verb::Untouch;
    type.actor = Actor::tool_l();
    type.object = object_class(TargetObject::needle());

    InverseInstance late;
    late.type = type;
    late.trial = trial_id_of(rec);
    late.members = {MotionPrimitive{Verb::Touch, Actor::tool_l(), TargetObject::needle(), 100, 110},
                    MotionPrimitive{Verb::Untouch, Actor::tool_l(), TargetObject::needle(), 111, 124}};
    late.gesture = GestureInstance{GestureId{2}, 90, 130, 0};
    late.duration_frames = 25;

    InverseInstance early = late;
    early.members = {MotionPrimitive{Verb::Touch, Actor::tool_l(), TargetObject::needle(), 10, 14},
                     MotionPrimitive{Verb::Untouch, Actor::tool_l(), TargetObject::needle(), 15, 19}};
    early.gesture.reset();
    early.duration_frames = 10;

    InverseInstance other = late;
    other.trial = TrialId{Task::KnotTying, "Z", 1};
    other.duration_frames = 25;

    const InverseInstance instances[] = {other, late, early};
    const TrialRecord records[] = {rec};
    auto csv = clip_index_csv(instances, records);

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto nl = csv.find('\n', pos);
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "trial_id,task,gesture,type,start_frame,end_frame,duration_seconds");
    CHECK(lines[1] ==
          "Suturing_B_1,S,outside,\"Touch(L, Needle) Untouch(L, Needle)\",10,19,0.4000");
    CHECK(lines[2] ==
          "Suturing_B_1,S,G2,\"Touch(L, Needle) Untouch(L, Needle)\",100,124,1.0000");
    CHECK(lines[3] ==
          "KnotTying_Z_1,KT,G2,\"Touch(L, Needle) Untouch(L, Needle)\",100,124,0.8333");
}

TEST_CASE("qc flag serialization") {
    QcFlag f;
    f.kind = QcKind::SignatureMismatch;
    f.trial = TrialId{Task::NeedlePassing, "C", 2};
    f.gesture = GestureInstance{GestureId{4}, 50, 90, 1};
    f.mps = {MotionPrimitive{Verb::Touch, Actor::of_object(TargetObject::needle()),
                             TargetObject::ring(), 60, 70}};
    f.suggested = GestureId{2};
    f.detail = "unique to G2, labeled G4";

    QcFlag plain;
    plain.kind = QcKind::RepeatedCanonical;
    plain.trial = f.trial;
    plain.gesture = GestureInstance{GestureId{3}, 0, 40, 0};
    plain.detail = "matched twice";

    const QcFlag flags[] = {f, plain};
    auto csv = qc_flags_csv(flags);
    CHECK(csv.rfind("trial_id,task,gesture,gesture_start,gesture_end,kind,suggested,mps,detail\n",
                    0) == 0);
    CHECK(csv.find("NeedlePassing_C_2,NP,G4,50,90,SignatureMismatch,G2,"
                   "\"Touch(Needle, Ring) [60,70]\",\"unique to G2, labeled G4\"") !=
          std::string::npos);
    CHECK(csv.find("NeedlePassing_C_2,NP,G3,0,40,RepeatedCanonical,,,matched twice") !=
          std::string::npos);

    auto j = nlohmann::json::parse(qc_flags_json(flags));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["kind"] == "SignatureMismatch");
    CHECK(j[0]["suggested"] == "G2");
    CHECK(j[0]["mps"][0]["label"] == "Touch(Needle, Ring)");
    CHECK(j[0]["mps"][0]["start"] == 60);
    CHECK_FALSE(j[1].contains("suggested"));
}

TEST_CASE("histogram csv") {
    const std::pair<std::string, int> hist[] = {{"Grasp(L, Needle), Release(R, Needle)", 4},
                                                {"∅", 1}};
    auto csv = histogram_csv(hist);
    CHECK(csv ==
          "sequence,count\n"
          "\"Grasp(L, Needle), Release(R, Needle)\",4\n"
          "∅,1\n");
}
