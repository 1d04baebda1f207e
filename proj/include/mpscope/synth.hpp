#pragma once
// Seeded synthetic corpus generator: canonical-driven gesture realization
// with ground-truth inverse-pair insertions, so the whole pipeline is
// testable without the datasets.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpscope/ingest.hpp"
#include "mpscope/model.hpp"

namespace mpscope {

struct SynthParams {
    Task task = Task::Suturing;
    Skill skill = Skill::Novice;
    std::string subject = "A";
    int trial_index = 1;
    double inverse_insertion_rate = 0.2;  // probability per canonical element
    int boundary_jitter_frames = 0;
    int mean_mp_duration_frames = 30;
    int gestures_per_trial = 10;
    std::uint64_t seed = 0;
};

struct InsertedPair {
    int gesture_ordinal = 0;
    GestureId gesture;
    MotionPrimitive first;
    MotionPrimitive second;
};

struct SynthTrial {
    TrialData data;
    std::vector<InsertedPair> insertions;  // ground truth for recall checks
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Raw engine output keeps the stream identical across standard libraries.
inline std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
    return n ? rng() % n : 0;
}

inline bool rand_bernoulli(std::mt19937_64& rng, double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

}  // namespace detail

/// Realizes each gesture's canonical pattern on a contiguous timeline. With
/// the given probability per element, a Touch/Untouch pair on the element's
/// channel is inserted right after it; that pair never interacts with the
/// merge rule and never steals a canonical match, so the detector recovers
/// every insertion at zero jitter. GRS subscores decrease with the insertion
/// count plus bounded noise. Deterministic per seed.
inline SynthTrial generate_trial(const SynthParams& params) {
    std::mt19937_64 rng(params.seed);
    SynthTrial out;
    TrialData& trial = out.data;
    trial.record.task = params.task;
    trial.record.subject = params.subject;
    trial.record.trial_index = params.trial_index;
    trial.record.skill = params.skill;
    trial.record.fps = 30;

    const auto& table = builtin_canonical_table();
    const std::vector<GestureId> cycle = canonical_gestures(table, params.task);

    const int mean = std::max(2, params.mean_mp_duration_frames);
    auto next_duration = [&] {
        const int lo = std::max(2, mean / 2);
        const int hi = mean + mean / 2;
        return lo + static_cast<int>(detail::rand_below(
                        rng, static_cast<std::uint64_t>(hi - lo + 1)));
    };

    Frame t = 0;
    int insertion_count = 0;
    for (int k = 0; k < params.gestures_per_trial; ++k) {
        const GestureId gid = cycle[static_cast<std::size_t>(k) % cycle.size()];
        const CanonicalEntry* entry = find_canonical(table, params.task, gid);
        const Frame g_start = t;
        for (const MpTriple& elem : entry->pattern) {
            MotionPrimitive mp{elem.verb, elem.actor, elem.object, t, t + next_duration() - 1};
            t = mp.end_frame + 1;
            trial.mps.push_back(mp);
            if (detail::rand_bernoulli(rng, params.inverse_insertion_rate)) {
                MotionPrimitive touch{Verb::Touch, elem.actor, elem.object, t,
                                      t + next_duration() - 1};
                t = touch.end_frame + 1;
                MotionPrimitive untouch{Verb::Untouch, elem.actor, elem.object, t,
                                        t + next_duration() - 1};
                t = untouch.end_frame + 1;
                trial.mps.push_back(touch);
                trial.mps.push_back(untouch);
                out.insertions.push_back({k, gid, touch, untouch});
                ++insertion_count;
            }
        }
        trial.gestures.push_back({gid, g_start, t - 1, k});
    }
    sort_trial_mps(trial.mps);

    if (params.boundary_jitter_frames > 0) {
        const int j = params.boundary_jitter_frames;
        for (std::size_t i = 0; i + 1 < trial.gestures.size(); ++i) {
            const long long delta =
                static_cast<long long>(detail::rand_below(
                    rng, static_cast<std::uint64_t>(2 * j + 1))) -
                j;
            Frame b = trial.gestures[i + 1].start_frame + delta;
            b = std::clamp(b, trial.gestures[i].start_frame + 1,
                           trial.gestures[i + 1].end_frame);
            trial.gestures[i].end_frame = b - 1;
            trial.gestures[i + 1].start_frame = b;
        }
    }

    double total = 0;
    for (int j = 0; j < kSubscoreCount; ++j) {
        const int noise = static_cast<int>(detail::rand_below(rng, 3));
        const int sub = std::clamp(5 - (insertion_count + noise) / 3, 1, 5);
        trial.record.subscores[static_cast<std::size_t>(j)] = sub;
        total += sub;
    }
    trial.record.grs_total = total;
    return out;
}

// 12 trials per task: four novice subjects with two trials each, two
// intermediates and two experts with one each. Skill-tied insertion rates
// decrease with expertise.
struct CorpusParams {
    std::uint64_t seed = 7;
    double novice_rate = 0.35;
    double intermediate_rate = 0.20;
    double expert_rate = 0.08;
    int boundary_jitter_frames = 0;
    int mean_mp_duration_frames = 30;
    int gestures_per_trial = 10;
};

inline std::vector<SynthTrial> generate_corpus(const CorpusParams& p) {
    struct SubjectPlan {
        const char* name;
        Skill skill;
        int trials;
    };
    static const SubjectPlan plan[] = {
        {"B", Skill::Novice, 2},       {"C", Skill::Novice, 2},
        {"D", Skill::Novice, 2},       {"E", Skill::Novice, 2},
        {"F", Skill::Intermediate, 1}, {"G", Skill::Intermediate, 1},
        {"H", Skill::Expert, 1},       {"I", Skill::Expert, 1},
    };
    std::vector<SynthTrial> out;
    for (Task task : kAllTasks) {
        for (const auto& s : plan) {
            for (int trial = 1; trial <= s.trials; ++trial) {
                SynthParams sp;
                sp.task = task;
                sp.skill = s.skill;
                sp.subject = s.name;
                sp.trial_index = trial;
                sp.inverse_insertion_rate = s.skill == Skill::Novice ? p.novice_rate
                                            : s.skill == Skill::Intermediate
                                                ? p.intermediate_rate
                                                : p.expert_rate;
                sp.boundary_jitter_frames = p.boundary_jitter_frames;
                sp.mean_mp_duration_frames = p.mean_mp_duration_frames;
                sp.gestures_per_trial = p.gestures_per_trial;
                sp.seed = detail::mix_seed(
                    p.seed, (static_cast<std::uint64_t>(task) << 32) ^
                                (static_cast<std::uint64_t>(s.name[0]) << 8) ^
                                static_cast<std::uint64_t>(trial));
                out.push_back(generate_trial(sp));
            }
        }
    }
    return out;
}

/// Writes the standard dataset layout plus a truth.json insertion log.
inline void write_corpus(std::span<const SynthTrial> trials,
                         const std::filesystem::path& dir) {
    std::vector<TrialRecord> records;
    nlohmann::json truth;
    truth["trials"] = nlohmann::json::array();
    for (const auto& st : trials) {
        const TrialData& t = st.data;
        const std::string stem = t.record.subject + "_" + std::to_string(t.record.trial_index);
        const std::filesystem::path task_dir = dir / std::string(task_label(t.record.task));
        write_text_file(task_dir / "gestures" / (stem + ".txt"),
                        render_gesture_transcript(t.gestures));
        write_text_file(task_dir / "motion_primitives" / (stem + ".txt"),
                        render_mp_transcript(t.mps));
        records.push_back(t.record);

        nlohmann::json jt;
        jt["trial_id"] = t.id().str();
        jt["insertions"] = nlohmann::json::array();
        auto mp_json = [](const MotionPrimitive& mp) {
            return nlohmann::json{{"label", mp_label(mp)},
                                  {"start", mp.start_frame},
                                  {"end", mp.end_frame}};
        };
        for (const auto& ins : st.insertions) {
            jt["insertions"].push_back({{"gesture", ins.gesture.label()},
                                        {"ordinal", ins.gesture_ordinal},
                                        {"first", mp_json(ins.first)},
                                        {"second", mp_json(ins.second)}});
        }
        truth["trials"].push_back(std::move(jt));
    }
    write_text_file(dir / "meta.csv", render_metadata_csv(records));
    write_text_file(dir / "truth.json", truth.dump(2) + "\n");
}

}  // namespace mpscope
