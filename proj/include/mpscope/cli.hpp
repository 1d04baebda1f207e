#pragma once
// Command-line front end: ingestion, normalization, detection, statistics,
// and artifact emission behind one subcommand-based binary.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpscope/graphs.hpp"
#include "mpscope/inverse.hpp"
#include "mpscope/qc.hpp"
#include "mpscope/report.hpp"
#include "mpscope/stats.hpp"
#include "mpscope/synth.hpp"

namespace mpscope::cli {

struct CommonOptions {
    std::string data_dir;
    std::string out_dir = "out";
    std::string task = "all";
    double fps = 0;  // 0 keeps per-trial metadata fps
    std::string counting_mode = "greedy";
    bool no_exclude_canonical = false;
    std::uint64_t seed = 7;
    std::string format = "csv,json,md";
    bool strict = false;
    long long min_edge_count = 1;
};

namespace detail {

struct UsageError {
    std::string message;
};

struct Loaded {
    std::vector<TrialData> trials;  // MPs merged
    std::vector<TrialRecord> records;
    std::vector<MPSequence> sequences;
    std::vector<InverseInstance> instances;
    std::vector<LoadIssue> issues;
    DetectionOptions detection;
    std::vector<OutputFormat> formats;
};

inline std::optional<Task> parse_task_filter(const std::string& s) {
    if (s == "all") return std::nullopt;
    auto t = parse_task(s);
    if (!t) throw UsageError{"unknown task '" + s + "' (expected S, NP, KT, or all)"};
    return t;
}

inline Loaded load_pipeline(const CommonOptions& o, std::ostream& err) {
    if (o.data_dir.empty()) throw UsageError{"--data-dir is required for this subcommand"};
    auto mode = parse_counting_mode(o.counting_mode);
    if (!mode)
        throw UsageError{"unknown counting mode '" + o.counting_mode +
                         "' (expected greedy, pairs, or runs)"};
    auto formats = parse_format_list(o.format);
    if (!formats)
        throw UsageError{"bad format list '" + o.format +
                         "' (expected a comma-separated subset of csv,json,md)"};
    const std::optional<Task> task_filter = parse_task_filter(o.task);

    Loaded out;
    out.detection.counting_mode = *mode;
    out.detection.exclude_canonical = !o.no_exclude_canonical;
    out.formats = *formats;

    Corpus corpus = scan_dataset(o.data_dir);
    out.issues = std::move(corpus.issues);
    for (const auto& issue : out.issues)
        err << "warning: " << issue.trial_id << ": " << issue.reason << "\n";
    if (o.strict && !out.issues.empty())
        throw Error(errc::io_error,
                    "incomplete dataset: " + std::to_string(out.issues.size()) +
                        " issue(s); rerun without --strict to continue");

    const auto& table = builtin_canonical_table();
    for (auto& trial : corpus.trials) {
        if (task_filter && trial.record.task != *task_filter) continue;
        if (o.fps > 0) trial.record.fps = o.fps;
        trial.mps = merge_touch_grasp(trial.mps);
        out.records.push_back(trial.record);
        auto seqs = extract_sequences(trial);
        out.sequences.insert(out.sequences.end(), seqs.begin(), seqs.end());
        auto insts = detect_inverse_trial(trial, table, out.detection);
        out.instances.insert(out.instances.end(), insts.begin(), insts.end());
        out.trials.push_back(std::move(trial));
    }
    return out;
}

inline void run_extract(const Loaded& d, const std::filesystem::path& out_dir) {
    std::set<std::pair<Task, GestureId>> groups;
    for (const auto& s : d.sequences) groups.insert({s.trial.task, s.gesture.id});
    for (const auto& [task, gid] : groups) {
        auto hist = sequence_histogram(d.sequences, task, gid);
        write_text_file(out_dir / "histograms" /
                            (std::string(task_label(task)) + "_" + gid.label() + ".csv"),
                        histogram_csv(hist));
    }
}

inline void run_detect(const Loaded& d, const std::filesystem::path& out_dir) {
    write_text_file(out_dir / "clips" / "index.csv", clip_index_csv(d.instances, d.records));
    write_table(count_by_type_and_gesture(d.instances, builtin_canonical_table()),
                out_dir / "tables", d.formats);
}

inline void run_correlate(const Loaded& d, const std::filesystem::path& out_dir) {
    const auto features = accumulate_trial_features(d.instances, d.records);
    for (Feature feature : {Feature::Count, Feature::DurationSeconds}) {
        std::vector<std::pair<std::string, std::vector<GrsCorrelationRow>>> per_task;
        for (Task task : kAllTasks) {
            std::vector<TrialRecord> records;
            std::vector<double> values;
            for (const auto& r : d.records) {
                if (r.task != task) continue;
                records.push_back(r);
                auto it = features.find(trial_id_of(r));
                values.push_back(it == features.end() ? 0.0 : it->second.get(feature));
            }
            if (records.empty()) continue;
            per_task.push_back({std::string(task_label(task)), correlate_grs(records, values)});
        }
        AggregateTable table = make_grs_table(
            "grs_correlation_" + std::string(feature_label(feature)),
            feature == Feature::Count
                ? "Spearman correlation between GRS scores and inverse MP counts"
                : "Spearman correlation between GRS scores and inverse MP durations",
            per_task);
        write_table(table, out_dir / "tables", d.formats);
    }
}

inline void run_graph(const Loaded& d, const std::filesystem::path& out_dir,
                      long long min_edge_count) {
    std::map<TrialId, Skill> skills;
    for (const auto& r : d.records) skills[trial_id_of(r)] = r.skill;
    std::map<std::tuple<Task, GestureId, Skill>, std::vector<MPSequence>> groups;
    for (const auto& s : d.sequences) {
        auto it = skills.find(s.trial);
        if (it == skills.end()) continue;
        groups[{s.trial.task, s.gesture.id, it->second}].push_back(s);
    }
    for (const auto& [key, seqs] : groups) {
        const auto& [task, gid, skill] = key;
        const std::string name = std::string(task_label(task)) + "_" + gid.label() + "_" +
                                 std::string(skill_label(skill));
        StateGraph g = build_state_graph(seqs, name);
        g = annotate_graph(std::move(g),
                           find_canonical(builtin_canonical_table(), task, gid), {});
        if (min_edge_count > 1) g = prune_edges(std::move(g), min_edge_count);
        write_text_file(out_dir / "graphs" / (name + ".dot"), emit_dot(g));
        write_text_file(out_dir / "graphs" / (name + ".json"), emit_graph_json(g));
    }
}

inline void run_qc(const Loaded& d, const std::filesystem::path& out_dir) {
    const auto& table = builtin_canonical_table();
    BoundaryReport boundary = boundary_mp_report(d.sequences, table);
    std::vector<QcFlag> flags = std::move(boundary.flags);
    auto mislabels = flag_mislabels(d.sequences, table);
    flags.insert(flags.end(), mislabels.begin(), mislabels.end());
    mpscope::detail::sort_flags(flags);
    write_text_file(out_dir / "qc" / "flags.csv", qc_flags_csv(flags));
    write_text_file(out_dir / "qc" / "flags.json", qc_flags_json(flags));
    write_table(boundary.table, out_dir / "tables", d.formats);
}

inline void run_coverage(const Loaded& d, const std::filesystem::path& out_dir) {
    const auto& table = builtin_canonical_table();
    write_table(clip_coverage(d.sequences, d.instances, d.records, table,
                              CoverageGroupBy::GestureByTask),
                out_dir / "tables", d.formats);
    write_table(clip_coverage(d.sequences, d.instances, d.records, table,
                              CoverageGroupBy::SkillByTask),
                out_dir / "tables", d.formats);
}

inline void run_synth(const CommonOptions& o, const std::filesystem::path& out_dir) {
    CorpusParams params;
    params.seed = o.seed;
    auto corpus = generate_corpus(params);
    write_corpus(corpus, out_dir);
}

}  // namespace detail

/// Entry point shared by the binary and in-process tests. Returns 0 on
/// success, 1 on validation errors (with a JSON error report on stderr), and
/// 2 on usage errors.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"Inverse motion primitive analysis over surgical activity transcripts"};
    app.require_subcommand(1);
    app.set_config("--config", "mpscope.toml", "Configuration file (key=value lines)", false);

    CommonOptions o;
    app.add_option("--data-dir", o.data_dir, "Dataset root directory");
    app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    app.add_option("--task", o.task, "Task filter: S, NP, KT, or all")->capture_default_str();
    app.add_option("--fps", o.fps, "Override frames per second for every trial");
    app.add_option("--counting-mode", o.counting_mode, "Counting mode: greedy, pairs, or runs")
        ->capture_default_str();
    app.add_flag("--no-exclude-canonical", o.no_exclude_canonical,
                 "Keep inverse pairs that overlap canonical matches");
    app.add_option("--seed", o.seed, "Seed for the synthetic corpus")->capture_default_str();
    app.add_option("--format", o.format, "Comma-separated table formats from csv,json,md")
        ->capture_default_str();
    app.add_flag("--strict", o.strict, "Fail instead of warning on incomplete datasets");
    app.add_option("--min-edge-count", o.min_edge_count, "Drop graph edges below this count")
        ->capture_default_str();

    const char* const subcommands[] = {"extract", "detect", "correlate", "graph",
                                       "qc",      "report", "synth"};
    const char* const descriptions[] = {
        "Extract per-gesture MP sequences and write sequence histograms",
        "Detect inverse MPs and write the clip index and type table",
        "Correlate per-trial inverse MP features with GRS scores",
        "Build per-(task, gesture, skill) state graphs as DOT and JSON",
        "Run annotation quality control and write flags",
        "Run the full pipeline and emit every artifact",
        "Generate a seeded synthetic dataset under --out-dir"};
    for (std::size_t i = 0; i < std::size(subcommands); ++i)
        app.add_subcommand(subcommands[i], descriptions[i])->fallthrough();

    std::vector<const char*> argv;
    argv.push_back("mpscope");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "mpscope\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    const std::filesystem::path out_dir = o.out_dir;
    try {
        if (sub == "synth") {
            detail::run_synth(o, out_dir);
            out << "wrote synthetic corpus to " << out_dir.string() << "\n";
            return 0;
        }
        detail::Loaded d = detail::load_pipeline(o, err);
        out << "loaded " << d.trials.size() << " trial(s), " << d.sequences.size()
            << " gesture clip(s), " << d.instances.size() << " inverse MP instance(s)\n";
        if (sub == "extract") {
            detail::run_extract(d, out_dir);
        } else if (sub == "detect") {
            detail::run_detect(d, out_dir);
        } else if (sub == "correlate") {
            detail::run_correlate(d, out_dir);
        } else if (sub == "graph") {
            detail::run_graph(d, out_dir, o.min_edge_count);
        } else if (sub == "qc") {
            detail::run_qc(d, out_dir);
        } else if (sub == "report") {
            detail::run_extract(d, out_dir);
            detail::run_detect(d, out_dir);
            detail::run_correlate(d, out_dir);
            detail::run_graph(d, out_dir, o.min_edge_count);
            detail::run_qc(d, out_dir);
            detail::run_coverage(d, out_dir);
        }
        return 0;
    } catch (const detail::UsageError& e) {
        err << "error: " << e.message << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        nlohmann::json j;
        j["error"] = {{"kind", errc_name(e.code())}, {"message", e.what()}};
        if (e.line() > 0) j["error"]["line"] = e.line();
        err << j.dump() << "\n";
        return 1;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args), out, err);
}

}  // namespace mpscope::cli
