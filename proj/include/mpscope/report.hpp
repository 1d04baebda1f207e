#pragma once
// Rendering: print-style numeric formatting, CSV/Markdown/JSON table
// emission, the clip index, QC flag serialization, and histogram files.

#include <cstdio>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpscope/ingest.hpp"
#include "mpscope/inverse.hpp"
#include "mpscope/qc.hpp"
#include "mpscope/stats.hpp"

namespace mpscope {

// ---------------------------------------------------------------------------
// Numeric print style: counts as integers, percentages to 1 decimal, rho to
// 2 decimals, p-values to 3 decimals with "<0.001" below 0.0005. A negative
// zero never appears.
// ---------------------------------------------------------------------------

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    std::string s(buf);
    if (!s.empty() && s[0] == '-' && s.find_first_not_of("0.", 1) == std::string::npos)
        s.erase(0, 1);
    return s;
}

inline std::string fmt_pct(double v) { return fmt_fixed(v, 1); }
inline std::string fmt_rho(double v) { return fmt_fixed(v, 2); }

inline std::string fmt_p(double p) {
    if (p < 0.0005) return "<0.001";
    return fmt_fixed(p, 3);
}

inline std::string cell_text(const Cell& c) {
    switch (c.kind) {
        case Cell::Kind::Empty: return "-";
        case Cell::Kind::Count: return std::to_string(c.count);
        case Cell::Kind::Ratio:
            return std::to_string(c.num) + "/" + std::to_string(c.den) + " (" +
                   fmt_pct(c.percent()) + "%)";
        case Cell::Kind::Real: return fmt_rho(c.value);
        case Cell::Kind::PValue: return fmt_p(c.value);
    }
    return "";
}

namespace detail {

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Table renderers
// ---------------------------------------------------------------------------

inline std::string table_to_csv(const AggregateTable& t) {
    std::string out = detail::csv_field(t.row_header);
    for (const auto& c : t.columns) out += "," + detail::csv_field(c);
    out += "\n";
    for (std::size_t r = 0; r < t.row_keys.size(); ++r) {
        out += detail::csv_field(t.row_keys[r]);
        for (const auto& cell : t.cells[r])
            out += "," + detail::csv_field(cell.kind == Cell::Kind::Empty ? "" : cell_text(cell));
        out += "\n";
    }
    return out;
}

inline std::string table_to_md(const AggregateTable& t) {
    std::string out = "# " + t.title + "\n\n";
    out += "| " + t.row_header;
    for (const auto& c : t.columns) out += " | " + c;
    out += " |\n|";
    for (std::size_t i = 0; i < t.columns.size() + 1; ++i) out += " --- |";
    out += "\n";
    for (std::size_t r = 0; r < t.row_keys.size(); ++r) {
        out += "| " + t.row_keys[r];
        for (const auto& cell : t.cells[r]) out += " | " + cell_text(cell);
        out += " |\n";
    }
    return out;
}

/// JSON rendering carries full precision values, not print-rounded text.
inline std::string table_to_json(const AggregateTable& t) {
    nlohmann::json j;
    j["name"] = t.name;
    j["title"] = t.title;
    j["row_header"] = t.row_header;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::json::array();
    for (std::size_t r = 0; r < t.row_keys.size(); ++r) {
        nlohmann::json row;
        row["key"] = t.row_keys[r];
        row["cells"] = nlohmann::json::array();
        for (const auto& cell : t.cells[r]) {
            switch (cell.kind) {
                case Cell::Kind::Empty: row["cells"].push_back(nullptr); break;
                case Cell::Kind::Count: row["cells"].push_back(cell.count); break;
                case Cell::Kind::Ratio:
                    row["cells"].push_back({{"num", cell.num},
                                            {"den", cell.den},
                                            {"percent", cell.percent()}});
                    break;
                case Cell::Kind::Real:
                case Cell::Kind::PValue: row["cells"].push_back(cell.value); break;
            }
        }
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

enum class OutputFormat { Csv, Json, Md };

inline std::optional<OutputFormat> parse_output_format(std::string_view s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    if (s == "md") return OutputFormat::Md;
    return std::nullopt;
}

/// Parses a comma-separated format list such as "csv,json,md".
inline std::optional<std::vector<OutputFormat>> parse_format_list(std::string_view s) {
    std::vector<OutputFormat> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string_view tok =
            s.substr(pos, comma == std::string_view::npos ? s.size() - pos : comma - pos);
        if (!tok.empty()) {
            auto f = parse_output_format(tok);
            if (!f) return std::nullopt;
            out.push_back(*f);
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

inline void write_table(const AggregateTable& t, const std::filesystem::path& dir,
                        std::span<const OutputFormat> formats) {
    for (OutputFormat f : formats) {
        switch (f) {
            case OutputFormat::Csv: write_text_file(dir / (t.name + ".csv"), table_to_csv(t)); break;
            case OutputFormat::Json:
                write_text_file(dir / (t.name + ".json"), table_to_json(t));
                break;
            case OutputFormat::Md: write_text_file(dir / (t.name + ".md"), table_to_md(t)); break;
        }
    }
}

// ---------------------------------------------------------------------------
// Clip index, QC flags, histograms
// ---------------------------------------------------------------------------

/// One row per instance with the frame range covering all members, sorted by
/// (trial, start frame). Durations use each trial's fps, 30 when unknown.
inline std::string clip_index_csv(std::span<const InverseInstance> instances,
                                  std::span<const TrialRecord> records) {
    std::map<TrialId, double> fps;
    for (const auto& r : records) fps[trial_id_of(r)] = r.fps;

    std::vector<const InverseInstance*> sorted;
    for (const auto& inst : instances) sorted.push_back(&inst);
    std::sort(sorted.begin(), sorted.end(), [](const InverseInstance* a, const InverseInstance* b) {
        if (a->trial != b->trial) return a->trial < b->trial;
        if (a->members.front().start_frame != b->members.front().start_frame)
            return a->members.front().start_frame < b->members.front().start_frame;
        return a->members < b->members;
    });

    std::string out = "trial_id,task,gesture,type,start_frame,end_frame,duration_seconds\n";
    for (const InverseInstance* inst : sorted) {
        auto it = fps.find(inst->trial);
        const double f = it == fps.end() ? 30.0 : it->second;
        out += detail::csv_field(inst->trial.str());
        out += "," + std::string(task_short_label(inst->trial.task));
        out += "," + (inst->gesture ? inst->gesture->id.label() : "outside");
        out += "," + detail::csv_field(inst->type.label());
        out += "," + std::to_string(inst->members.front().start_frame);
        out += "," + std::to_string(inst->members.back().end_frame);
        out += "," + fmt_fixed(instance_duration_seconds(*inst, f), 4);
        out += "\n";
    }
    return out;
}

inline std::string qc_flags_csv(std::span<const QcFlag> flags) {
    std::string out =
        "trial_id,task,gesture,gesture_start,gesture_end,kind,suggested,mps,detail\n";
    for (const auto& f : flags) {
        std::string mps;
        for (std::size_t i = 0; i < f.mps.size(); ++i) {
            if (i) mps += "; ";
            mps += mp_label(f.mps[i]) + " [" + std::to_string(f.mps[i].start_frame) + "," +
                   std::to_string(f.mps[i].end_frame) + "]";
        }
        out += detail::csv_field(f.trial.str());
        out += "," + std::string(task_short_label(f.trial.task));
        out += "," + f.gesture.id.label();
        out += "," + std::to_string(f.gesture.start_frame);
        out += "," + std::to_string(f.gesture.end_frame);
        out += "," + std::string(qc_kind_label(f.kind));
        out += "," + (f.suggested ? f.suggested->label() : std::string());
        out += "," + detail::csv_field(mps);
        out += "," + detail::csv_field(f.detail);
        out += "\n";
    }
    return out;
}

inline std::string qc_flags_json(std::span<const QcFlag> flags) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& f : flags) {
        nlohmann::json jf;
        jf["trial_id"] = f.trial.str();
        jf["task"] = task_label(f.trial.task);
        jf["gesture"] = f.gesture.id.label();
        jf["gesture_start"] = f.gesture.start_frame;
        jf["gesture_end"] = f.gesture.end_frame;
        jf["kind"] = qc_kind_label(f.kind);
        if (f.suggested) jf["suggested"] = f.suggested->label();
        jf["mps"] = nlohmann::json::array();
        for (const auto& mp : f.mps)
            jf["mps"].push_back({{"label", mp_label(mp)},
                                 {"start", mp.start_frame},
                                 {"end", mp.end_frame}});
        jf["detail"] = f.detail;
        j.push_back(std::move(jf));
    }
    return j.dump(2) + "\n";
}

inline std::string histogram_csv(std::span<const std::pair<std::string, int>> hist) {
    std::string out = "sequence,count\n";
    for (const auto& [key, count] : hist)
        out += detail::csv_field(key) + "," + std::to_string(count) + "\n";
    return out;
}

}  // namespace mpscope
