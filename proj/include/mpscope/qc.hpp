#pragma once
// Annotation quality control: boundary-MP leakage reporting and gesture
// mislabel flagging driven by the canonical table.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mpscope/model.hpp"
#include "mpscope/seqops.hpp"
#include "mpscope/stats.hpp"

namespace mpscope {

enum class QcKind { BoundaryLeakage, SignatureMismatch, TrailingCanonical, RepeatedCanonical };

inline std::string_view qc_kind_label(QcKind k) {
    switch (k) {
        case QcKind::BoundaryLeakage: return "BoundaryLeakage";
        case QcKind::SignatureMismatch: return "SignatureMismatch";
        case QcKind::TrailingCanonical: return "TrailingCanonical";
        case QcKind::RepeatedCanonical: return "RepeatedCanonical";
    }
    return "?";
}

// Advisory only; suggested relabels are never applied.
struct QcFlag {
    QcKind kind = QcKind::BoundaryLeakage;
    TrialId trial;
    GestureInstance gesture;
    std::vector<MotionPrimitive> mps;  // cited MPs, at least one
    std::optional<GestureId> suggested;
    std::string detail;
};

/// Triples appearing in exactly one gesture's canonical pattern for the
/// task, mapped to that gesture.
inline std::map<MpTriple, GestureId> signature_map(const std::vector<CanonicalEntry>& table,
                                                   Task task) {
    std::map<MpTriple, std::set<int>> seen;
    for (const auto& e : table) {
        if (e.task != task) continue;
        for (const auto& t : e.pattern) seen[t].insert(e.gesture.value);
    }
    std::map<MpTriple, GestureId> out;
    for (const auto& [triple, gestures] : seen)
        if (gestures.size() == 1) out[triple] = GestureId{*gestures.begin()};
    return out;
}

namespace detail {

inline bool contained_in(const MotionPrimitive& mp, const GestureInstance& g) {
    return mp.start_frame >= g.start_frame && mp.end_frame <= g.end_frame;
}

inline std::set<MpTriple> pattern_triples(const CanonicalEntry* e) {
    std::set<MpTriple> out;
    if (e)
        for (const auto& t : e->pattern) out.insert(t);
    return out;
}

// Sequences of one trial in transcript order.
inline std::map<TrialId, std::vector<const MPSequence*>> group_by_trial(
    std::span<const MPSequence> sequences) {
    std::map<TrialId, std::vector<const MPSequence*>> out;
    for (const auto& s : sequences) out[s.trial].push_back(&s);
    for (auto& [id, list] : out)
        std::sort(list.begin(), list.end(), [](const MPSequence* a, const MPSequence* b) {
            return a->gesture.ordinal < b->gesture.ordinal;
        });
    return out;
}

inline void sort_flags(std::vector<QcFlag>& flags) {
    std::sort(flags.begin(), flags.end(), [](const QcFlag& a, const QcFlag& b) {
        if (a.trial != b.trial) return a.trial < b.trial;
        if (a.gesture.start_frame != b.gesture.start_frame)
            return a.gesture.start_frame < b.gesture.start_frame;
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.detail < b.detail;
    });
}

}  // namespace detail

struct BoundaryReport {
    std::vector<QcFlag> flags;
    AggregateTable table;  // frequency per (task, gesture, neighbor MP, origin)
};

/// Flags MPs fully contained in a gesture window (boundary straddlers are
/// expected duplicates and skipped) that match a canonical element of the
/// actual neighboring gesture instance but none of the labeled gesture's
/// own. Aggregated counts accompany the per-instance flags.
inline BoundaryReport boundary_mp_report(std::span<const MPSequence> sequences,
                                         const std::vector<CanonicalEntry>& table) {
    BoundaryReport report;
    std::map<std::string, long long> agg;

    for (const auto& [trial, seqs] : detail::group_by_trial(sequences)) {
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            const MPSequence& s = *seqs[i];
            const auto own =
                detail::pattern_triples(find_canonical(table, trial.task, s.gesture.id));
            struct Neighbor {
                const MPSequence* seq;
                const char* origin;
            };
            std::vector<Neighbor> neighbors;
            if (i > 0) neighbors.push_back({seqs[i - 1], "before"});
            if (i + 1 < seqs.size()) neighbors.push_back({seqs[i + 1], "after"});
            for (const auto& [nb, origin] : neighbors) {
                const auto theirs =
                    detail::pattern_triples(find_canonical(table, trial.task, nb->gesture.id));
                if (theirs.empty()) continue;
                for (const auto& mp : s.mps) {
                    if (!detail::contained_in(mp, s.gesture)) continue;
                    if (own.count(mp.triple())) continue;
                    if (!theirs.count(mp.triple())) continue;
                    QcFlag flag;
                    flag.kind = QcKind::BoundaryLeakage;
                    flag.trial = trial;
                    flag.gesture = s.gesture;
                    flag.mps = {mp};
                    flag.suggested = nb->gesture.id;
                    flag.detail = mp_label(mp) + " of the " + nb->gesture.id.label() + " " +
                                  origin;
                    report.flags.push_back(std::move(flag));
                    ++agg[std::string(task_short_label(trial.task)) + " " +
                          s.gesture.id.label() + ": " + mp_label(mp) + " (" +
                          nb->gesture.id.label() + " " + origin + ")"];
                }
            }
        }
    }
    detail::sort_flags(report.flags);

    report.table.name = "boundary_mps";
    report.table.title = "Common MPs from neighboring gestures found in each gesture";
    report.table.row_header = "Gesture and neighbor MP";
    report.table.columns = {"Count"};
    for (const auto& [key, count] : agg) {
        report.table.row_keys.push_back(key);
        report.table.cells.push_back({Cell::of_count(count)});
    }
    return report;
}

/// Mislabel heuristics over merged, extracted sequences:
/// SignatureMismatch, a contained MP that is another gesture's signature;
/// TrailingCanonical, the sequence ends with a different gesture's full
/// canonical while the rest still covers (a possibly beheaded copy of) the
/// labeled gesture's own; RepeatedCanonical, the own pattern matches two or
/// more disjoint times. A sequence equal to its own canonical never flags.
inline std::vector<QcFlag> flag_mislabels(std::span<const MPSequence> sequences,
                                          const std::vector<CanonicalEntry>& table) {
    std::vector<QcFlag> flags;
    std::map<Task, std::map<MpTriple, GestureId>> signatures;
    for (Task t : kAllTasks) signatures[t] = signature_map(table, t);

    for (const auto& s : sequences) {
        const Task task = s.trial.task;
        const CanonicalEntry* own = find_canonical(table, task, s.gesture.id);

        // (a) signature MPs of another gesture inside this clip
        std::map<GestureId, std::vector<MotionPrimitive>> hits;
        for (const auto& mp : s.mps) {
            if (!detail::contained_in(mp, s.gesture)) continue;
            auto it = signatures[task].find(mp.triple());
            if (it == signatures[task].end() || it->second == s.gesture.id) continue;
            hits[it->second].push_back(mp);
        }
        for (auto& [suggested, mps] : hits) {
            QcFlag flag;
            flag.kind = QcKind::SignatureMismatch;
            flag.trial = s.trial;
            flag.gesture = s.gesture;
            flag.mps = std::move(mps);
            flag.suggested = suggested;
            flag.detail = mp_label(flag.mps.front()) + " is unique to " + suggested.label() +
                          " but this clip is labeled " + s.gesture.id.label();
            flags.push_back(std::move(flag));
        }

        std::vector<MpTriple> triples;
        for (const auto& mp : s.mps) triples.push_back(mp.triple());
        const std::size_t n = triples.size();

        // (b) full canonical of a different gesture as the exact suffix, with
        // the labeled gesture's own pattern still present in the prefix
        // (leading elements may be boundary straddlers, so up to all but one
        // may be dropped).
        if (own) {
            for (const auto& e : table) {
                if (e.task != task || e.gesture == s.gesture.id) continue;
                const std::size_t k = e.pattern.size();
                if (k == 0 || k >= n) continue;
                bool suffix = true;
                for (std::size_t j = 0; j < k; ++j)
                    if (triples[n - k + j] != e.pattern[j]) { suffix = false; break; }
                if (!suffix) continue;
                bool prefix_ok = false;
                for (std::size_t drop = 0; drop < own->pattern.size() && !prefix_ok; ++drop) {
                    std::size_t pos = 0;
                    std::size_t matched = drop;
                    while (matched < own->pattern.size() && pos < n - k) {
                        if (triples[pos] == own->pattern[matched]) ++matched;
                        ++pos;
                    }
                    prefix_ok = matched == own->pattern.size();
                }
                if (!prefix_ok) continue;
                QcFlag flag;
                flag.kind = QcKind::TrailingCanonical;
                flag.trial = s.trial;
                flag.gesture = s.gesture;
                flag.mps.assign(s.mps.end() - static_cast<std::ptrdiff_t>(k), s.mps.end());
                flag.suggested = e.gesture;
                flag.detail = "sequence ends with the full " + e.gesture.label() +
                              " canonical; probable boundary or label error";
                flags.push_back(std::move(flag));
            }
        }

        // (c) own canonical matched twice or more, disjoint left-to-right
        if (own && !own->pattern.empty()) {
            std::vector<std::vector<std::size_t>> matches;
            std::size_t from = 0;
            while (from < n) {
                std::size_t pos = from;
                std::vector<std::size_t> hit;
                for (const auto& want : own->pattern) {
                    while (pos < n && triples[pos] != want) ++pos;
                    if (pos == n) break;
                    hit.push_back(pos++);
                }
                if (hit.size() != own->pattern.size()) break;
                from = hit.back() + 1;
                matches.push_back(std::move(hit));
            }
            if (matches.size() >= 2) {
                QcFlag flag;
                flag.kind = QcKind::RepeatedCanonical;
                flag.trial = s.trial;
                flag.gesture = s.gesture;
                for (std::size_t idx : matches[1]) flag.mps.push_back(s.mps[idx]);
                flag.detail = "own canonical pattern matched " +
                              std::to_string(matches.size()) + " disjoint times; probable re-attempt";
                flags.push_back(std::move(flag));
            }
        }
    }
    detail::sort_flags(flags);
    return flags;
}

}  // namespace mpscope
