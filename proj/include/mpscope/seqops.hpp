#pragma once
// Transcript normalization (the Touch/Grasp and Release/Untouch merge rule),
// boundary-inclusive extraction of per-gesture MP sequences, and sequence
// histograms.

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpscope/ingest.hpp"
#include "mpscope/model.hpp"

namespace mpscope {

// MP sequence observed inside one gesture window. Every member MP overlaps
// [gesture.start_frame, gesture.end_frame]; ordering is the trial ordering.
// Boundary-straddling MPs appear in the sequences of both neighbors.
struct MPSequence {
    TrialId trial;
    GestureInstance gesture;
    std::vector<MotionPrimitive> mps;
};

/// Rewrites each channel so that Touch immediately followed by Grasp on the
/// same (actor, object) becomes one Grasp spanning [touch.start, grasp.end],
/// and Release immediately followed by Untouch becomes one Release. Adjacency
/// is judged on the channel's own subsequence; interleaved MPs on other
/// channels do not block a merge. Applied left-to-right until fixpoint, so
/// chains like Touch, Touch, Grasp collapse fully. Idempotent.
inline std::vector<MotionPrimitive> merge_touch_grasp(std::span<const MotionPrimitive> mps) {
    std::map<ChannelKey, std::vector<MotionPrimitive>> channels;
    for (const auto& mp : mps) channels[channel_of(mp)].push_back(mp);

    auto mergeable = [](const MotionPrimitive& a, const MotionPrimitive& b) {
        return (a.verb == Verb::Touch && b.verb == Verb::Grasp) ||
               (a.verb == Verb::Release && b.verb == Verb::Untouch);
    };
    for (auto& [key, list] : channels) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i + 1 < list.size(); ++i) {
                if (!mergeable(list[i], list[i + 1])) continue;
                MotionPrimitive merged = list[i].verb == Verb::Touch ? list[i + 1] : list[i];
                merged.start_frame = list[i].start_frame;
                merged.end_frame = list[i + 1].end_frame;
                list[i] = merged;
                list.erase(list.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                changed = true;
            }
        }
    }

    std::vector<MotionPrimitive> out;
    out.reserve(mps.size());
    for (auto& [key, list] : channels)
        out.insert(out.end(), list.begin(), list.end());
    sort_trial_mps(out);
    return out;
}

inline bool intervals_intersect(Frame a_start, Frame a_end, Frame b_start, Frame b_end) {
    return a_start <= b_end && b_start <= a_end;
}

/// One MPSequence per gesture instance; an MP belongs to a gesture's sequence
/// iff its frame interval intersects the gesture's (inclusive on both ends).
/// Expects trial.mps already merged.
inline std::vector<MPSequence> extract_sequences(const TrialData& trial) {
    std::vector<MPSequence> out;
    out.reserve(trial.gestures.size());
    const TrialId id = trial.id();
    for (const auto& g : trial.gestures) {
        MPSequence seq{id, g, {}};
        for (const auto& mp : trial.mps)
            if (intervals_intersect(mp.start_frame, mp.end_frame, g.start_frame, g.end_frame))
                seq.mps.push_back(mp);
        out.push_back(std::move(seq));
    }
    return out;
}

/// Grouping key for histogram rows: comma-joined MP labels in order, or the
/// empty-sequence marker.
inline std::string sequence_key(const MPSequence& seq) {
    if (seq.mps.empty()) return "∅";
    std::string out;
    for (std::size_t i = 0; i < seq.mps.size(); ++i) {
        if (i) out += ", ";
        out += mp_label(seq.mps[i]);
    }
    return out;
}

/// Counts identical sequence keys among instances of (task, gesture_id),
/// sorted by descending count then key. The counts sum to the number of
/// matching gesture instances.
inline std::vector<std::pair<std::string, int>> sequence_histogram(
    std::span<const MPSequence> seqs, Task task, GestureId gesture_id) {
    std::map<std::string, int> counts;
    for (const auto& s : seqs)
        if (s.trial.task == task && s.gesture.id == gesture_id) ++counts[sequence_key(s)];
    std::vector<std::pair<std::string, int>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace mpscope
