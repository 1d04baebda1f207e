#pragma once
// Transcript and metadata parsing plus dataset directory scanning.
//
// Formats (UTF-8 text):
//   gesture transcript:  "<start> <end> G<k>" per line
//   MP transcript:       "<start> <end> Verb(Actor, Object)" per line
//   metadata:            CSV with header columns task,subject,trial,skill,
//                        grs_total,<six subscore columns>[,fps]
// Dataset layout: <root>/<task>/gestures/<id>.txt,
//                 <root>/<task>/motion_primitives/<id>.txt, <root>/meta.csv
// where <id> is "<subject>_<trial_index>".

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mpscope/errors.hpp"
#include "mpscope/model.hpp"

namespace mpscope {

// One fully loaded trial. Gestures are sorted and non-overlapping; MPs are
// sorted by (start, end, channel label, verb).
struct TrialData {
    TrialRecord record;
    std::vector<GestureInstance> gestures;
    std::vector<MotionPrimitive> mps;

    TrialId id() const { return trial_id_of(record); }
};

inline bool trial_mp_less(const MotionPrimitive& a, const MotionPrimitive& b) {
    if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
    if (a.end_frame != b.end_frame) return a.end_frame < b.end_frame;
    const std::string ca = channel_label(channel_of(a));
    const std::string cb = channel_label(channel_of(b));
    if (ca != cb) return ca < cb;
    return static_cast<int>(a.verb) < static_cast<int>(b.verb);
}

inline void sort_trial_mps(std::vector<MotionPrimitive>& mps) {
    std::stable_sort(mps.begin(), mps.end(), trial_mp_less);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::optional<Frame> parse_frame(std::string_view tok) {
    Frame v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v < 0) return std::nullopt;
    return v;
}

// Iterates non-empty lines, tracking 1-based numbers. CR is stripped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = true;
        for (char c : line)
            if (c != ' ' && c != '\t') { blank = false; break; }
        if (!blank) fn(line, line_no);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

}  // namespace detail

/// Parses a gesture transcript, validating interval sanity, the closed
/// G1..G15 vocabulary, sortedness, and non-overlap.
inline std::vector<GestureInstance> parse_gesture_transcript(std::string_view text) {
    std::vector<GestureInstance> out;
    detail::for_each_line(text, [&](std::string_view line, int line_no) {
        auto toks = detail::split_ws(line);
        if (toks.size() != 3) throw Error(errc::malformed_line, std::string(line), line_no);
        auto start = detail::parse_frame(toks[0]);
        auto end = detail::parse_frame(toks[1]);
        if (!start || !end || *end < *start)
            throw Error(errc::malformed_line, std::string(line), line_no);
        auto id = parse_gesture_id(toks[2]);
        if (!id) throw Error(errc::unknown_gesture, std::string(toks[2]), line_no);
        if (!out.empty() && *start <= out.back().end_frame)
            throw Error(errc::overlap,
                        "gesture starts at " + std::to_string(*start) +
                            " before previous ends at " + std::to_string(out.back().end_frame),
                        line_no);
        out.push_back({*id, *start, *end, static_cast<int>(out.size())});
    });
    return out;
}

/// Parses an MP transcript. Distinct channels may overlap in time; MPs on
/// the same (actor, object) channel must not.
inline std::vector<MotionPrimitive> parse_mp_transcript(std::string_view text) {
    std::vector<MotionPrimitive> out;
    std::map<ChannelKey, Frame> last_end;
    detail::for_each_line(text, [&](std::string_view line, int line_no) {
        auto toks = detail::split_ws(line);
        if (toks.size() < 3) throw Error(errc::malformed_line, std::string(line), line_no);
        auto start = detail::parse_frame(toks[0]);
        auto end = detail::parse_frame(toks[1]);
        if (!start || !end || *end < *start)
            throw Error(errc::malformed_line, std::string(line), line_no);
        // Rejoin the label (it contains one space after the comma).
        std::string label;
        for (std::size_t i = 2; i < toks.size(); ++i) {
            if (i > 2) label += ' ';
            label += toks[i];
        }
        auto triple = parse_mp_triple(label);
        if (!triple) {
            auto open = label.find('(');
            if (open != std::string::npos && !parse_verb(label.substr(0, open)))
                throw Error(errc::unknown_verb, label.substr(0, open), line_no);
            throw Error(errc::malformed_line, label, line_no);
        }
        ChannelKey ch = channel_of(*triple);
        auto it = last_end.find(ch);
        if (it != last_end.end() && *start <= it->second)
            throw Error(errc::same_channel_overlap, channel_label(ch), line_no);
        last_end[ch] = std::max(it == last_end.end() ? *end : it->second, *end);
        out.push_back({triple->verb, triple->actor, triple->object, *start, *end});
    });
    sort_trial_mps(out);
    return out;
}

inline std::string render_gesture_transcript(std::span<const GestureInstance> gestures) {
    std::string out;
    for (const auto& g : gestures) {
        out += std::to_string(g.start_frame) + " " + std::to_string(g.end_frame) + " " +
               g.id.label() + "\n";
    }
    return out;
}

inline std::string render_mp_transcript(std::span<const MotionPrimitive> mps) {
    std::string out;
    for (const auto& mp : mps) {
        out += std::to_string(mp.start_frame) + " " + std::to_string(mp.end_frame) + " " +
               mp_label(mp) + "\n";
    }
    return out;
}

namespace detail {

// Minimal CSV line splitter with double-quote support.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else cur += c;
    }
    out.push_back(cur);
    return out;
}

// Lowercases and drops non-alphanumerics so header spellings like
// "RespectForTissue" and "respect_for_tissue" both match.
inline std::string normalize_header(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c >= 'A' && c <= 'Z') out += char(c - 'A' + 'a');
        else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += c;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view tok) {
    try {
        std::size_t used = 0;
        std::string s(tok);
        double v = std::stod(s, &used);
        while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Parses trial metadata CSV. fps defaults to 30 when absent.
inline std::vector<TrialRecord> parse_metadata_csv(std::string_view text) {
    std::vector<std::pair<std::string_view, int>> lines;
    detail::for_each_line(text, [&](std::string_view line, int no) { lines.push_back({line, no}); });
    if (lines.empty()) return {};

    auto header = detail::split_csv_line(lines[0].first);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[detail::normalize_header(header[i])] = i;

    auto require = [&](std::string_view name) -> std::size_t {
        auto it = col.find(detail::normalize_header(name));
        if (it == col.end()) throw Error(errc::missing_column, std::string(name));
        return it->second;
    };
    const std::size_t c_task = require("task");
    const std::size_t c_subject = require("subject");
    const std::size_t c_trial = require("trial");
    const std::size_t c_skill = require("skill");
    const std::size_t c_grs = require("grs_total");
    std::array<std::size_t, kSubscoreCount> c_sub{};
    for (int i = 0; i < kSubscoreCount; ++i) c_sub[i] = require(kSubscoreKeys[i]);
    std::optional<std::size_t> c_fps;
    if (auto it = col.find("fps"); it != col.end()) c_fps = it->second;

    std::vector<TrialRecord> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto cells = detail::split_csv_line(lines[li].first);
        const int line_no = lines[li].second;
        auto cell = [&](std::size_t c) -> std::string_view {
            if (c >= cells.size())
                throw Error(errc::malformed_line, "row has too few columns", line_no);
            return cells[c];
        };
        TrialRecord r;
        auto task = parse_task(cell(c_task));
        if (!task) throw Error(errc::malformed_line, "bad task " + std::string(cell(c_task)), line_no);
        r.task = *task;
        r.subject = std::string(cell(c_subject));
        auto trial = detail::parse_number(cell(c_trial));
        if (!trial) throw Error(errc::malformed_line, "bad trial index", line_no);
        r.trial_index = static_cast<int>(*trial);
        auto skill = parse_skill(cell(c_skill));
        if (!skill) throw Error(errc::bad_skill_code, std::string(cell(c_skill)), line_no);
        r.skill = *skill;
        auto grs = detail::parse_number(cell(c_grs));
        if (!grs) throw Error(errc::malformed_line, "bad grs_total", line_no);
        r.grs_total = *grs;
        for (int i = 0; i < kSubscoreCount; ++i) {
            auto v = detail::parse_number(cell(c_sub[i]));
            if (!v)
                throw Error(errc::malformed_line, "bad " + std::string(kSubscoreKeys[i]), line_no);
            r.subscores[i] = *v;
        }
        if (c_fps) {
            auto v = detail::parse_number(cell(*c_fps));
            if (!v || *v <= 0) throw Error(errc::malformed_line, "bad fps", line_no);
            r.fps = *v;
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string render_metadata_csv(std::span<const TrialRecord> records) {
    std::string out = "task,subject,trial,skill,grs_total";
    for (auto k : kSubscoreKeys) out += "," + std::string(k);
    out += ",fps\n";
    auto num = [](double v) {
        if (v == static_cast<long long>(v)) return std::to_string(static_cast<long long>(v));
        std::ostringstream ss;
        ss << v;
        return ss.str();
    };
    for (const auto& r : records) {
        out += std::string(task_label(r.task)) + "," + r.subject + "," +
               std::to_string(r.trial_index) + "," + std::string(skill_label(r.skill)) + "," +
               num(r.grs_total);
        for (double s : r.subscores) out += "," + num(s);
        out += "," + num(r.fps) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset scan
// ---------------------------------------------------------------------------

struct LoadIssue {
    std::string trial_id;
    std::string reason;

    auto operator<=>(const LoadIssue&) const = default;
};

struct Corpus {
    std::vector<TrialData> trials;  // sorted by (task, subject, trial_index)
    std::vector<LoadIssue> issues;
};

inline std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Creates parent directories as needed.
inline void write_text_file(const std::filesystem::path& p, std::string_view content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(errc::io_error, "write failed for " + p.string());
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) { return read_text_file(p); }

// "<subject>_<trial>" split at the last underscore.
inline std::optional<std::pair<std::string, int>> parse_trial_stem(const std::string& stem) {
    auto us = stem.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 >= stem.size()) return std::nullopt;
    int trial = 0;
    auto tok = std::string_view(stem).substr(us + 1);
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), trial);
    if (ec != std::errc() || p != tok.data() + tok.size()) return std::nullopt;
    return std::make_pair(stem.substr(0, us), trial);
}

}  // namespace detail

/// Walks the dataset layout under root and assembles all trials whose three
/// sources (gesture file, MP file, metadata row) are present. Incomplete or
/// unparseable trials land in the issue list instead of being dropped
/// silently.
inline Corpus scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    Corpus corpus;
    if (!fs::exists(root)) throw Error(errc::io_error, "no such directory: " + root.string());

    std::map<TrialId, TrialRecord> meta;
    const fs::path meta_path = root / "meta.csv";
    if (fs::exists(meta_path)) {
        for (auto& r : parse_metadata_csv(detail::read_file(meta_path)))
            meta[trial_id_of(r)] = r;
    } else {
        corpus.issues.push_back({"-", "missing meta.csv"});
    }

    std::map<TrialId, std::pair<fs::path, fs::path>> files;  // gesture, mp paths
    for (Task task : kAllTasks) {
        const fs::path task_dir = root / std::string(task_label(task));
        if (!fs::exists(task_dir)) continue;
        for (const char* sub : {"gestures", "motion_primitives"}) {
            const fs::path dir = task_dir / sub;
            if (!fs::exists(dir)) continue;
            for (const auto& ent : fs::directory_iterator(dir)) {
                if (!ent.is_regular_file() || ent.path().extension() != ".txt") continue;
                auto parsed = detail::parse_trial_stem(ent.path().stem().string());
                if (!parsed) {
                    corpus.issues.push_back(
                        {ent.path().filename().string(), "unrecognized trial file name"});
                    continue;
                }
                TrialId id{task, parsed->first, parsed->second};
                if (std::string_view(sub) == "gestures") files[id].first = ent.path();
                else files[id].second = ent.path();
            }
        }
    }

    std::vector<TrialId> ids;
    for (const auto& [id, _] : files) ids.push_back(id);
    for (const auto& [id, _] : meta)
        if (!files.count(id)) ids.push_back(id);
    std::sort(ids.begin(), ids.end());

    for (const TrialId& id : ids) {
        auto fit = files.find(id);
        const bool has_gesture = fit != files.end() && !fit->second.first.empty();
        const bool has_mp = fit != files.end() && !fit->second.second.empty();
        auto mit = meta.find(id);
        if (!has_gesture || !has_mp || mit == meta.end()) {
            std::string missing;
            if (!has_gesture) missing += " gesture-transcript";
            if (!has_mp) missing += " mp-transcript";
            if (mit == meta.end()) missing += " metadata";
            corpus.issues.push_back({id.str(), "missing:" + missing});
            continue;
        }
        try {
            TrialData trial;
            trial.record = mit->second;
            trial.gestures = parse_gesture_transcript(detail::read_file(fit->second.first));
            trial.mps = parse_mp_transcript(detail::read_file(fit->second.second));
            corpus.trials.push_back(std::move(trial));
        } catch (const Error& e) {
            corpus.issues.push_back({id.str(), e.what()});
        }
    }
    std::sort(corpus.trials.begin(), corpus.trials.end(),
              [](const TrialData& a, const TrialData& b) { return a.id() < b.id(); });
    std::sort(corpus.issues.begin(), corpus.issues.end());
    return corpus;
}

}  // namespace mpscope
