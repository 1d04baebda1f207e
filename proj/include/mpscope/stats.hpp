#pragma once
// Aggregation of inverse-MP results into report tables and Spearman rank
// correlation against GRS scores.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mpscope/errors.hpp"
#include "mpscope/inverse.hpp"
#include "mpscope/model.hpp"
#include "mpscope/seqops.hpp"

namespace mpscope {

// ---------------------------------------------------------------------------
// Aggregate tables
// ---------------------------------------------------------------------------

struct Cell {
    enum class Kind { Empty, Count, Ratio, Real, PValue };

    Kind kind = Kind::Empty;
    long long count = 0;        // Count
    long long num = 0, den = 0; // Ratio
    double value = 0;           // Real, PValue

    static Cell empty() { return {}; }
    static Cell of_count(long long c) { return {Kind::Count, c, 0, 0, 0}; }
    static Cell ratio(long long n, long long d) { return {Kind::Ratio, 0, n, d, 0}; }
    static Cell real(double v) { return {Kind::Real, 0, 0, 0, v}; }
    static Cell pvalue(double v) { return {Kind::PValue, 0, 0, 0, v}; }

    double percent() const { return den > 0 ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0; }
};

struct AggregateTable {
    std::string name;   // file stem
    std::string title;
    std::string row_header;
    std::vector<std::string> columns;
    std::vector<std::string> row_keys;
    std::vector<std::vector<Cell>> cells;  // [row][column]
};

namespace detail {

// Whether an object class can occur in a task's scene at all; drives the
// dash-vs-zero distinction in the type-by-gesture table.
inline bool class_possible_in_task(const ObjectClass& cls, Task task) {
    switch (cls.kind) {
        case ObjectClass::Kind::Needle:
        case ObjectClass::Kind::FabricOrRing:
            return task != Task::KnotTying;
        case ObjectClass::Kind::Thread:
        case ObjectClass::Kind::Other:
            return true;
    }
    return true;
}

inline bool type_possible_in_task(const InverseTypeKey& type, Task task) {
    if (type.kind == InverseTypeKey::Kind::PushPull) return task != Task::KnotTying;
    return class_possible_in_task(type.object, task);
}

}  // namespace detail

/// Counts instances per (type, gesture) with row/column totals. Rows start
/// with the fixed builtin type order; unexpected types are appended sorted by
/// label. Columns are the canonical-gesture union plus any extra gestures
/// seen, then "outside" for unattributed instances, then "Total". Cells that
/// cannot occur in any task of the column's gesture render empty.
inline AggregateTable count_by_type_and_gesture(std::span<const InverseInstance> instances,
                                                const std::vector<CanonicalEntry>& table) {
    AggregateTable out;
    out.name = "inverse_types_by_gesture";
    out.title = "Inverse MP counts by type and gesture";
    out.row_header = "Inverse MP";

    std::vector<InverseTypeKey> types = builtin_inverse_types();
    std::set<std::string> known;
    for (const auto& t : types) known.insert(t.label());
    std::map<std::string, InverseTypeKey> extra;
    for (const auto& inst : instances)
        if (!known.count(inst.type.label())) extra[inst.type.label()] = inst.type;
    for (const auto& [label, key] : extra) types.push_back(key);

    std::vector<GestureId> gestures;
    std::set<GestureId> have;
    for (Task task : kAllTasks)
        for (GestureId g : canonical_gestures(table, task))
            if (have.insert(g).second) gestures.push_back(g);
    std::sort(gestures.begin(), gestures.end());
    bool outside = false;
    {
        std::set<GestureId> extra_g;
        for (const auto& inst : instances) {
            if (!inst.gesture) { outside = true; continue; }
            if (!have.count(inst.gesture->id)) extra_g.insert(inst.gesture->id);
        }
        for (GestureId g : extra_g) gestures.push_back(g);
    }

    std::map<std::pair<std::string, std::string>, long long> counts;
    for (const auto& inst : instances) {
        const std::string col = inst.gesture ? inst.gesture->id.label() : "outside";
        ++counts[{inst.type.label(), col}];
    }

    // Tasks in which a canonical-union gesture appears; extra gestures admit
    // every task, so their cells are always numeric.
    auto gesture_tasks = [&](GestureId g) {
        std::vector<Task> tasks;
        for (Task task : kAllTasks)
            if (find_canonical(table, task, g)) tasks.push_back(task);
        if (tasks.empty()) tasks.assign(kAllTasks.begin(), kAllTasks.end());
        return tasks;
    };

    for (GestureId g : gestures) out.columns.push_back(g.label());
    if (outside) out.columns.push_back("outside");
    out.columns.push_back("Total");

    std::vector<long long> col_totals(out.columns.size(), 0);
    for (const auto& type : types) {
        const std::string label = type.label();
        out.row_keys.push_back(label);
        std::vector<Cell> row;
        long long row_total = 0;
        for (std::size_t c = 0; c + 1 < out.columns.size(); ++c) {
            const std::string& col = out.columns[c];
            bool possible = true;
            if (col != "outside") {
                auto gid = parse_gesture_id(col);
                possible = false;
                for (Task task : gesture_tasks(*gid))
                    if (detail::type_possible_in_task(type, task)) possible = true;
            }
            auto it = counts.find({label, col});
            const long long n = it == counts.end() ? 0 : it->second;
            if (!possible && n == 0) {
                row.push_back(Cell::empty());
            } else {
                row.push_back(Cell::of_count(n));
                row_total += n;
                col_totals[c] += n;
            }
        }
        row.push_back(Cell::of_count(row_total));
        col_totals.back() += row_total;
        out.cells.push_back(std::move(row));
    }

    out.row_keys.push_back("Total");
    std::vector<Cell> totals;
    for (long long t : col_totals) totals.push_back(Cell::of_count(t));
    out.cells.push_back(std::move(totals));
    return out;
}

enum class CoverageGroupBy { GestureByTask, SkillByTask };

/// Fraction of gesture clips containing at least one attributed instance.
/// The clip universe is every extracted sequence whose (task, gesture) has a
/// canonical entry. GestureByTask rows are tasks with gesture columns;
/// SkillByTask rows are tasks with skill columns plus a total column. Groups
/// with zero clips render empty rather than 0/0.
inline AggregateTable clip_coverage(std::span<const MPSequence> sequences,
                                    std::span<const InverseInstance> instances,
                                    std::span<const TrialRecord> records,
                                    const std::vector<CanonicalEntry>& table,
                                    CoverageGroupBy group_by) {
    std::map<TrialId, Skill> skills;
    for (const auto& r : records) skills[trial_id_of(r)] = r.skill;

    struct ClipRef {
        TrialId trial;
        int ordinal;
        auto operator<=>(const ClipRef&) const = default;
    };
    std::set<ClipRef> covered;
    for (const auto& inst : instances) {
        if (!inst.gesture) continue;
        if (!find_canonical(table, inst.trial.task, inst.gesture->id)) continue;
        covered.insert({inst.trial, inst.gesture->ordinal});
    }

    AggregateTable out;
    out.row_header = "Task";
    for (Task task : kAllTasks) out.row_keys.push_back(std::string(task_label(task)));
    out.row_keys.push_back("Total");

    if (group_by == CoverageGroupBy::GestureByTask) {
        out.name = "clip_coverage_by_gesture";
        out.title = "Gesture clips with one or more inverse MPs, by gesture";
        std::vector<GestureId> gestures;
        std::set<GestureId> have;
        for (Task task : kAllTasks)
            for (GestureId g : canonical_gestures(table, task))
                if (have.insert(g).second) gestures.push_back(g);
        std::sort(gestures.begin(), gestures.end());
        for (GestureId g : gestures) out.columns.push_back(g.label());

        std::map<std::pair<Task, GestureId>, std::pair<long long, long long>> agg;
        for (const auto& s : sequences) {
            if (!find_canonical(table, s.trial.task, s.gesture.id)) continue;
            auto& cell = agg[{s.trial.task, s.gesture.id}];
            ++cell.second;
            if (covered.count({s.trial, s.gesture.ordinal})) ++cell.first;
        }
        for (Task task : kAllTasks) {
            std::vector<Cell> row;
            for (GestureId g : gestures) {
                auto it = agg.find({task, g});
                if (it == agg.end() || it->second.second == 0) row.push_back(Cell::empty());
                else row.push_back(Cell::ratio(it->second.first, it->second.second));
            }
            out.cells.push_back(std::move(row));
        }
        std::vector<Cell> totals;
        for (GestureId g : gestures) {
            long long n = 0, d = 0;
            for (Task task : kAllTasks) {
                auto it = agg.find({task, g});
                if (it != agg.end()) { n += it->second.first; d += it->second.second; }
            }
            totals.push_back(d ? Cell::ratio(n, d) : Cell::empty());
        }
        out.cells.push_back(std::move(totals));
        return out;
    }

    out.name = "clip_coverage_by_skill";
    out.title = "Gesture clips with one or more inverse MPs, by experience level";
    for (Skill s : kAllSkills) out.columns.push_back(std::string(skill_label(s)));
    out.columns.push_back("Total");

    std::map<std::pair<Task, Skill>, std::pair<long long, long long>> agg;
    for (const auto& s : sequences) {
        if (!find_canonical(table, s.trial.task, s.gesture.id)) continue;
        auto it = skills.find(s.trial);
        if (it == skills.end()) continue;
        auto& cell = agg[{s.trial.task, it->second}];
        ++cell.second;
        if (covered.count({s.trial, s.gesture.ordinal})) ++cell.first;
    }
    auto ratio_or_empty = [](long long n, long long d) {
        return d ? Cell::ratio(n, d) : Cell::empty();
    };
    for (Task task : kAllTasks) {
        std::vector<Cell> row;
        long long tn = 0, td = 0;
        for (Skill s : kAllSkills) {
            auto it = agg.find({task, s});
            const long long n = it == agg.end() ? 0 : it->second.first;
            const long long d = it == agg.end() ? 0 : it->second.second;
            row.push_back(ratio_or_empty(n, d));
            tn += n;
            td += d;
        }
        row.push_back(ratio_or_empty(tn, td));
        out.cells.push_back(std::move(row));
    }
    std::vector<Cell> totals;
    long long gn = 0, gd = 0;
    for (Skill s : kAllSkills) {
        long long n = 0, d = 0;
        for (Task task : kAllTasks) {
            auto it = agg.find({task, s});
            if (it != agg.end()) { n += it->second.first; d += it->second.second; }
        }
        totals.push_back(ratio_or_empty(n, d));
        gn += n;
        gd += d;
    }
    totals.push_back(ratio_or_empty(gn, gd));
    out.cells.push_back(std::move(totals));
    return out;
}

// ---------------------------------------------------------------------------
// Spearman correlation
// ---------------------------------------------------------------------------

/// Average-rank transform: ties receive the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Two-sided p-value for an observed rho via the t-approximation
/// t = rho * sqrt((n-2)/(1-rho^2)) against Student's t with n-2 degrees of
/// freedom. |rho| >= 1 yields 0.
inline double spearman_p_value(double rho, int n) {
    if (n < 3) throw Error(errc::degenerate_input, "need at least 3 observations");
    if (std::abs(rho) >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

/// Spearman's rho with average-rank ties and a two-sided p-value from the
/// t-approximation. rho = +/-1 yields p = 0. Throws DegenerateInput for
/// constant lists or fewer than three observations.
inline CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(errc::degenerate_input, "length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw Error(errc::degenerate_input, "need at least 3 observations");
    auto constant = [](std::span<const double> v) {
        for (double e : v)
            if (e != v.front()) return false;
        return true;
    };
    if (constant(x)) throw Error(errc::degenerate_input, "first list is constant");
    if (constant(y)) throw Error(errc::degenerate_input, "second list is constant");

    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);

    CorrelationResult out;
    out.rho = rho;
    out.n = static_cast<int>(n);
    out.p_value = spearman_p_value(rho, out.n);
    return out;
}

// ---------------------------------------------------------------------------
// GRS correlation table
// ---------------------------------------------------------------------------

enum class Feature { Count, DurationSeconds };

inline std::string_view feature_label(Feature f) {
    return f == Feature::Count ? "count" : "duration_seconds";
}

struct TrialFeatures {
    double count = 0;
    double duration_seconds = 0;

    double get(Feature f) const { return f == Feature::Count ? count : duration_seconds; }
};

/// Per-trial instance count and total duration in seconds at the trial's fps
/// (30 when the trial has no metadata row). Trials with records but no
/// instances still appear, with zeros.
inline std::map<TrialId, TrialFeatures> accumulate_trial_features(
    std::span<const InverseInstance> instances, std::span<const TrialRecord> records) {
    std::map<TrialId, double> fps;
    std::map<TrialId, TrialFeatures> out;
    for (const auto& r : records) {
        fps[trial_id_of(r)] = r.fps;
        out[trial_id_of(r)];
    }
    for (const auto& inst : instances) {
        auto& f = out[inst.trial];
        f.count += 1;
        auto it = fps.find(inst.trial);
        f.duration_seconds += instance_duration_seconds(inst, it == fps.end() ? 30.0 : it->second);
    }
    return out;
}

struct GrsCorrelationRow {
    std::string name;  // subscore display name, or "GRS Score" for the total
    std::optional<CorrelationResult> result;
    std::string note;  // degeneracy reason when result is empty
};

/// Seven rows (six subscores then the GRS total), each correlating the
/// feature vector against one score column over the given trials. Degenerate
/// rows carry a note instead of aborting the table.
inline std::vector<GrsCorrelationRow> correlate_grs(std::span<const TrialRecord> records,
                                                    std::span<const double> feature_values) {
    if (records.size() != feature_values.size())
        throw Error(errc::degenerate_input, "records and features differ in length");
    std::vector<GrsCorrelationRow> out;
    auto add = [&](std::string name, auto score_of) {
        std::vector<double> scores;
        scores.reserve(records.size());
        for (const auto& r : records) scores.push_back(score_of(r));
        GrsCorrelationRow row;
        row.name = std::move(name);
        try {
            row.result = spearman(feature_values, scores);
        } catch (const Error& e) {
            row.note = e.what();
        }
        out.push_back(std::move(row));
    };
    for (int i = 0; i < kSubscoreCount; ++i)
        add(std::string(kSubscoreNames[i]), [i](const TrialRecord& r) { return r.subscores[i]; });
    add("GRS Score", [](const TrialRecord& r) { return r.grs_total; });
    return out;
}

/// Assembles per-task correlation rows into one table with rho and p-value
/// columns per task.
inline AggregateTable make_grs_table(
    std::string name, std::string title,
    std::span<const std::pair<std::string, std::vector<GrsCorrelationRow>>> per_task) {
    AggregateTable out;
    out.name = std::move(name);
    out.title = std::move(title);
    out.row_header = "GRS Subscore";
    for (const auto& [task_name, rows] : per_task) {
        out.columns.push_back(task_name + " rho");
        out.columns.push_back(task_name + " p-value");
    }
    std::vector<std::string> row_names;
    for (auto n : kSubscoreNames) row_names.push_back(std::string(n));
    row_names.push_back("GRS Score");
    for (std::size_t r = 0; r < row_names.size(); ++r) {
        out.row_keys.push_back(row_names[r]);
        std::vector<Cell> row;
        for (const auto& [task_name, rows] : per_task) {
            const GrsCorrelationRow* match = nullptr;
            for (const auto& cand : rows)
                if (cand.name == row_names[r]) match = &cand;
            if (match && match->result) {
                row.push_back(Cell::real(match->result->rho));
                row.push_back(Cell::pvalue(match->result->p_value));
            } else {
                row.push_back(Cell::empty());
                row.push_back(Cell::empty());
            }
        }
        out.cells.push_back(std::move(row));
    }
    return out;
}

}  // namespace mpscope
