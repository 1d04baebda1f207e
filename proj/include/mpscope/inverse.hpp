#pragma once
// Inverse MP detection: adjacent negating verb pairs within a channel, the
// needle push/pull extraction pair, canonical-sequence exclusion, and three
// counting granularities.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mpscope/ingest.hpp"
#include "mpscope/model.hpp"
#include "mpscope/seqops.hpp"

namespace mpscope {

// GreedyNonOverlapping consumes members left-to-right, so a run of k
// alternating MPs yields floor(k/2) instances; AllAdjacentPairs yields k-1;
// MaximalRun yields one instance whose members are the whole run.
enum class CountingMode { GreedyNonOverlapping, AllAdjacentPairs, MaximalRun };

inline std::string_view counting_mode_label(CountingMode m) {
    switch (m) {
        case CountingMode::GreedyNonOverlapping: return "greedy";
        case CountingMode::AllAdjacentPairs: return "pairs";
        case CountingMode::MaximalRun: return "runs";
    }
    return "?";
}

inline std::optional<CountingMode> parse_counting_mode(std::string_view s) {
    if (s == "greedy") return CountingMode::GreedyNonOverlapping;
    if (s == "pairs") return CountingMode::AllAdjacentPairs;
    if (s == "runs") return CountingMode::MaximalRun;
    return std::nullopt;
}

struct DetectionOptions {
    CountingMode counting_mode = CountingMode::GreedyNonOverlapping;
    bool exclude_canonical = true;
    bool enable_push_pull_rule = true;
};

/// Partition by (actor, object), each sublist preserving input order.
inline std::map<ChannelKey, std::vector<MotionPrimitive>> channel_project(
    std::span<const MotionPrimitive> mps) {
    std::map<ChannelKey, std::vector<MotionPrimitive>> out;
    for (const auto& mp : mps) out[channel_of(mp)].push_back(mp);
    return out;
}

inline bool is_push_needle_into_target(const MotionPrimitive& mp) {
    return mp.verb == Verb::Push && !mp.actor.is_tool() &&
           mp.actor.object == TargetObject::needle() &&
           (mp.object.kind == TargetObject::Kind::Fabric ||
            mp.object.kind == TargetObject::Kind::Ring);
}

inline bool is_pull_needle_by_tool(const MotionPrimitive& mp) {
    return mp.verb == Verb::Pull && mp.actor.is_tool() && mp.object == TargetObject::needle();
}

namespace detail {

inline InverseTypeKey channel_pair_type(const MotionPrimitive& a, const MotionPrimitive& b) {
    Verb v1 = a.verb;
    Verb v2 = b.verb;
    if (static_cast<int>(v2) < static_cast<int>(v1)) std::swap(v1, v2);
    return {InverseTypeKey::Kind::ChannelPair, v1, v2, a.actor, object_class(a.object)};
}

inline InverseTypeKey push_pull_type(const MotionPrimitive& push, const MotionPrimitive& pull) {
    return {InverseTypeKey::Kind::PushPull, Verb::Push, Verb::Pull, pull.actor,
            object_class(push.object)};
}

inline InverseInstance make_instance(std::span<const MotionPrimitive> seq,
                                     std::span<const std::size_t> member_idx,
                                     InverseTypeKey type) {
    InverseInstance inst;
    inst.type = std::move(type);
    for (std::size_t i : member_idx) {
        inst.members.push_back(seq[i]);
        inst.duration_frames += seq[i].duration_frames();
    }
    return inst;
}

// Detection with a precomputed consumed mask. A candidate is an adjacent
// negating pair in a channel sublist (or a Push-then-Pull pair in the
// needle-interaction sublist) whose members are both unconsumed. Adjacency
// is judged on the original sublist, so a consumed MP still separates its
// neighbors.
inline std::vector<InverseInstance> detect_core(std::span<const MotionPrimitive> seq,
                                                const std::vector<bool>& consumed,
                                                const DetectionOptions& opts) {
    std::vector<InverseInstance> out;

    std::map<ChannelKey, std::vector<std::size_t>> channels;
    for (std::size_t i = 0; i < seq.size(); ++i) channels[channel_of(seq[i])].push_back(i);

    for (const auto& [key, idx] : channels) {
        const std::size_t m = idx.size();
        if (m < 2) continue;
        std::vector<bool> cand(m - 1, false);
        for (std::size_t j = 0; j + 1 < m; ++j) {
            auto inv = verb_inverse(seq[idx[j]].verb);
            cand[j] = inv && *inv == seq[idx[j + 1]].verb && !consumed[idx[j]] &&
                      !consumed[idx[j + 1]];
        }
        switch (opts.counting_mode) {
            case CountingMode::GreedyNonOverlapping:
                for (std::size_t j = 0; j + 1 < m;) {
                    if (cand[j]) {
                        const std::size_t members[] = {idx[j], idx[j + 1]};
                        out.push_back(make_instance(
                            seq, members, channel_pair_type(seq[idx[j]], seq[idx[j + 1]])));
                        j += 2;
                    } else {
                        ++j;
                    }
                }
                break;
            case CountingMode::AllAdjacentPairs:
                for (std::size_t j = 0; j + 1 < m; ++j) {
                    if (!cand[j]) continue;
                    const std::size_t members[] = {idx[j], idx[j + 1]};
                    out.push_back(make_instance(seq, members,
                                                channel_pair_type(seq[idx[j]], seq[idx[j + 1]])));
                }
                break;
            case CountingMode::MaximalRun:
                for (std::size_t j = 0; j + 1 < m;) {
                    if (!cand[j]) { ++j; continue; }
                    std::size_t k = j;
                    while (k + 1 < m && cand[k]) ++k;
                    std::vector<std::size_t> members(idx.begin() + static_cast<std::ptrdiff_t>(j),
                                                     idx.begin() + static_cast<std::ptrdiff_t>(k) +
                                                         1);
                    out.push_back(make_instance(seq, members,
                                                channel_pair_type(seq[idx[j]], seq[idx[j + 1]])));
                    j = k + 1;
                }
                break;
        }
    }

    if (opts.enable_push_pull_rule) {
        std::vector<std::size_t> needle;
        for (std::size_t i = 0; i < seq.size(); ++i)
            if (is_push_needle_into_target(seq[i]) || is_pull_needle_by_tool(seq[i]))
                needle.push_back(i);
        // Push-then-Pull candidates cannot chain or share members, so all
        // counting modes agree on this sublist.
        for (std::size_t j = 0; j + 1 < needle.size(); ++j) {
            const auto& a = seq[needle[j]];
            const auto& b = seq[needle[j + 1]];
            if (!is_push_needle_into_target(a) || !is_pull_needle_by_tool(b)) continue;
            if (consumed[needle[j]] || consumed[needle[j + 1]]) continue;
            const std::size_t members[] = {needle[j], needle[j + 1]};
            out.push_back(make_instance(seq, members, push_pull_type(a, b)));
        }
    }

    std::sort(out.begin(), out.end(), [](const InverseInstance& a, const InverseInstance& b) {
        if (a.members.front().start_frame != b.members.front().start_frame)
            return a.members.front().start_frame < b.members.front().start_frame;
        if (a.members != b.members) return a.members < b.members;
        return a.type < b.type;
    });
    return out;
}

}  // namespace detail

/// Detects inverse MPs within one (merged) sequence. With exclusion on and a
/// canonical entry present, the pattern is matched once as a greedy
/// left-to-right subsequence (frames ignored); matched MPs are consumed and
/// any pair touching a consumed MP is suppressed. A partial pattern match
/// consumes nothing, and repeated canonical occurrences beyond the first are
/// kept (repetitions signal re-attempts).
inline std::vector<InverseInstance> detect_inverse(std::span<const MotionPrimitive> seq,
                                                   const CanonicalEntry* canonical,
                                                   const DetectionOptions& opts = {}) {
    std::vector<bool> consumed(seq.size(), false);
    if (opts.exclude_canonical && canonical) {
        if (auto hit = match_pattern_subsequence(seq, canonical->pattern))
            for (std::size_t i : *hit) consumed[i] = true;
    }
    return detail::detect_core(seq, consumed, opts);
}

/// Convenience wrapper attributing results to the sequence's gesture.
inline std::vector<InverseInstance> detect_inverse(const MPSequence& seq,
                                                   const std::vector<CanonicalEntry>& table,
                                                   const DetectionOptions& opts = {}) {
    auto out = detect_inverse(std::span<const MotionPrimitive>(seq.mps),
                              find_canonical(table, seq.trial.task, seq.gesture.id), opts);
    for (auto& inst : out) {
        inst.trial = seq.trial;
        inst.gesture = seq.gesture;
    }
    return out;
}

/// Detects over the full (merged) trial MP list, all gestures included.
/// Canonical exclusion is applied per gesture window where an entry exists;
/// consumed marks are unioned across windows. Each instance is attributed to
/// the gesture window containing its first member's start frame, or left
/// unattributed when it starts outside every window.
inline std::vector<InverseInstance> detect_inverse_trial(const TrialData& trial,
                                                         const std::vector<CanonicalEntry>& table,
                                                         const DetectionOptions& opts = {}) {
    std::vector<bool> consumed(trial.mps.size(), false);
    if (opts.exclude_canonical) {
        for (const auto& g : trial.gestures) {
            const CanonicalEntry* entry = find_canonical(table, trial.record.task, g.id);
            if (!entry) continue;
            std::vector<std::size_t> win;
            std::vector<MotionPrimitive> window;
            for (std::size_t i = 0; i < trial.mps.size(); ++i) {
                if (intervals_intersect(trial.mps[i].start_frame, trial.mps[i].end_frame,
                                        g.start_frame, g.end_frame)) {
                    win.push_back(i);
                    window.push_back(trial.mps[i]);
                }
            }
            if (auto hit = match_pattern_subsequence(window, entry->pattern))
                for (std::size_t k : *hit) consumed[win[k]] = true;
        }
    }
    auto out = detail::detect_core(trial.mps, consumed, opts);
    const TrialId id = trial.id();
    for (auto& inst : out) {
        inst.trial = id;
        inst.gesture = std::nullopt;
        const Frame s = inst.members.front().start_frame;
        for (const auto& g : trial.gestures) {
            if (g.start_frame <= s && s <= g.end_frame) {
                inst.gesture = g;
                break;
            }
        }
    }
    return out;
}

inline double instance_duration_seconds(const InverseInstance& inst, double fps) {
    return static_cast<double>(inst.duration_frames) / fps;
}

/// The fixed report row order for inverse types: Touch/Untouch then
/// Grasp/Release per tool over Needle, Thread, and F/R, then the needle
/// touch pair and the push/pull extraction pair.
inline const std::vector<InverseTypeKey>& builtin_inverse_types() {
    static const std::vector<InverseTypeKey> rows = [] {
        const Actor L = Actor::tool_l();
        const Actor R = Actor::tool_r();
        const Actor AN = Actor::of_object(TargetObject::needle());
        const ObjectClass needle{ObjectClass::Kind::Needle, {}};
        const ObjectClass thread{ObjectClass::Kind::Thread, {}};
        const ObjectClass fr{ObjectClass::Kind::FabricOrRing, {}};
        std::vector<InverseTypeKey> t;
        auto pair = [&](Verb a, Verb b, Actor actor, ObjectClass cls) {
            t.push_back({InverseTypeKey::Kind::ChannelPair, a, b, actor, cls});
        };
        for (const ObjectClass& cls : {needle, thread, fr}) {
            pair(Verb::Touch, Verb::Untouch, L, cls);
            pair(Verb::Touch, Verb::Untouch, R, cls);
            pair(Verb::Grasp, Verb::Release, L, cls);
            pair(Verb::Grasp, Verb::Release, R, cls);
        }
        pair(Verb::Touch, Verb::Untouch, AN, fr);
        t.push_back({InverseTypeKey::Kind::PushPull, Verb::Push, Verb::Pull, R, fr});
        return t;
    }();
    return rows;
}

}  // namespace mpscope
