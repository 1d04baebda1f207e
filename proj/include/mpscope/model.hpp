#pragma once
// Domain model for surgical activity transcripts: motion primitive (MP)
// triplets, gesture instances, trial metadata, and the surgeon-defined
// canonical MP sequence table shared by every analysis stage.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpscope {

using Frame = std::int64_t;

// ---------------------------------------------------------------------------
// Verbs
// ---------------------------------------------------------------------------

enum class Verb { Touch, Untouch, Grasp, Release, Push, Pull };

inline constexpr std::array<Verb, 6> kAllVerbs = {
    Verb::Touch, Verb::Untouch, Verb::Grasp, Verb::Release, Verb::Push, Verb::Pull};

constexpr std::string_view verb_label(Verb v) {
    switch (v) {
        case Verb::Touch: return "Touch";
        case Verb::Untouch: return "Untouch";
        case Verb::Grasp: return "Grasp";
        case Verb::Release: return "Release";
        case Verb::Push: return "Push";
        case Verb::Pull: return "Pull";
    }
    return "?";
}

/// Channel-sense negation: Touch<->Untouch, Grasp<->Release. Push and Pull
/// are not related here; they pair only through the needle-extraction rule.
constexpr std::optional<Verb> verb_inverse(Verb v) {
    switch (v) {
        case Verb::Touch: return Verb::Untouch;
        case Verb::Untouch: return Verb::Touch;
        case Verb::Grasp: return Verb::Release;
        case Verb::Release: return Verb::Grasp;
        default: return std::nullopt;
    }
}

inline std::optional<Verb> parse_verb(std::string_view s) {
    for (Verb v : kAllVerbs)
        if (s == verb_label(v)) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Objects and actors
// ---------------------------------------------------------------------------

// Target object of an MP. Unseen object names parse as Other so transcripts
// with a wider vocabulary still load; identity for Other is the exact name.
struct TargetObject {
    enum class Kind { Needle, Thread, Fabric, Ring, Other };

    Kind kind = Kind::Other;
    std::string name;  // set iff kind == Other

    static TargetObject needle() { return {Kind::Needle, {}}; }
    static TargetObject thread() { return {Kind::Thread, {}}; }
    static TargetObject fabric() { return {Kind::Fabric, {}}; }
    static TargetObject ring() { return {Kind::Ring, {}}; }
    static TargetObject other(std::string n) { return {Kind::Other, std::move(n)}; }

    auto operator<=>(const TargetObject&) const = default;
};

inline std::string object_label(const TargetObject& o) {
    switch (o.kind) {
        case TargetObject::Kind::Needle: return "Needle";
        case TargetObject::Kind::Thread: return "Thread";
        case TargetObject::Kind::Fabric: return "Fabric";
        case TargetObject::Kind::Ring: return "Ring";
        case TargetObject::Kind::Other: return o.name;
    }
    return "?";
}

inline TargetObject parse_object(std::string_view s) {
    if (s == "Needle") return TargetObject::needle();
    if (s == "Thread") return TargetObject::thread();
    if (s == "Fabric") return TargetObject::fabric();
    if (s == "Ring") return TargetObject::ring();
    return TargetObject::other(std::string(s));
}

// The moving entity: one of the two tools, or an object acting as the mover
// (e.g. the needle in Touch(Needle, Fabric)).
struct Actor {
    enum class Kind { ToolL, ToolR, Object };

    Kind kind = Kind::ToolL;
    TargetObject object;  // set iff kind == Object

    static Actor tool_l() { return {Kind::ToolL, {}}; }
    static Actor tool_r() { return {Kind::ToolR, {}}; }
    static Actor of_object(TargetObject o) { return {Kind::Object, std::move(o)}; }

    bool is_tool() const { return kind != Kind::Object; }

    auto operator<=>(const Actor&) const = default;
};

inline std::string actor_label(const Actor& a) {
    switch (a.kind) {
        case Actor::Kind::ToolL: return "L";
        case Actor::Kind::ToolR: return "R";
        case Actor::Kind::Object: return object_label(a.object);
    }
    return "?";
}

inline Actor parse_actor(std::string_view s) {
    if (s == "L") return Actor::tool_l();
    if (s == "R") return Actor::tool_r();
    return Actor::of_object(parse_object(s));
}

// Report-level grouping of objects: Fabric and Ring collapse into one
// class ("F/R"); every other object maps to itself.
struct ObjectClass {
    enum class Kind { Needle, Thread, FabricOrRing, Other };

    Kind kind = Kind::Other;
    std::string name;  // set iff kind == Other

    auto operator<=>(const ObjectClass&) const = default;
};

inline ObjectClass object_class(const TargetObject& o) {
    switch (o.kind) {
        case TargetObject::Kind::Needle: return {ObjectClass::Kind::Needle, {}};
        case TargetObject::Kind::Thread: return {ObjectClass::Kind::Thread, {}};
        case TargetObject::Kind::Fabric:
        case TargetObject::Kind::Ring: return {ObjectClass::Kind::FabricOrRing, {}};
        case TargetObject::Kind::Other: return {ObjectClass::Kind::Other, o.name};
    }
    return {};
}

inline std::string object_class_label(const ObjectClass& c) {
    switch (c.kind) {
        case ObjectClass::Kind::Needle: return "Needle";
        case ObjectClass::Kind::Thread: return "Thread";
        case ObjectClass::Kind::FabricOrRing: return "F/R";
        case ObjectClass::Kind::Other: return c.name;
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Motion primitives
// ---------------------------------------------------------------------------

// (verb, actor, object) without frames; canonical patterns and all pattern
// matching work at this level.
struct MpTriple {
    Verb verb = Verb::Touch;
    Actor actor;
    TargetObject object;

    auto operator<=>(const MpTriple&) const = default;
};

struct MotionPrimitive {
    Verb verb = Verb::Touch;
    Actor actor;
    TargetObject object;
    Frame start_frame = 0;
    Frame end_frame = 0;  // inclusive

    MpTriple triple() const { return {verb, actor, object}; }
    Frame duration_frames() const { return end_frame - start_frame + 1; }

    auto operator<=>(const MotionPrimitive&) const = default;
};

inline std::string mp_label(const MpTriple& t) {
    return std::string(verb_label(t.verb)) + "(" + actor_label(t.actor) + ", " +
           object_label(t.object) + ")";
}

inline std::string mp_label(const MotionPrimitive& mp) { return mp_label(mp.triple()); }

/// Parses "Verb(Actor, Object)". Rejects unknown verbs, structural noise,
/// and actor == object. Round-trips with mp_label.
inline std::optional<MpTriple> parse_mp_triple(std::string_view s) {
    auto open = s.find('(');
    if (open == std::string_view::npos || s.empty() || s.back() != ')') return std::nullopt;
    auto verb = parse_verb(s.substr(0, open));
    if (!verb) return std::nullopt;
    std::string_view inner = s.substr(open + 1, s.size() - open - 2);
    auto comma = inner.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
        return v;
    };
    std::string_view actor_tok = trim(inner.substr(0, comma));
    std::string_view object_tok = trim(inner.substr(comma + 1));
    if (actor_tok.empty() || object_tok.empty()) return std::nullopt;
    if (object_tok.find(',') != std::string_view::npos) return std::nullopt;
    MpTriple t{*verb, parse_actor(actor_tok), parse_object(object_tok)};
    if (!t.actor.is_tool() && t.actor.object == t.object) return std::nullopt;
    return t;
}

// Exact (actor, object) pair; adjacency for inverse detection is judged
// inside a channel. Fabric and Ring stay distinct here.
struct ChannelKey {
    Actor actor;
    TargetObject object;

    auto operator<=>(const ChannelKey&) const = default;
};

inline ChannelKey channel_of(const MotionPrimitive& mp) { return {mp.actor, mp.object}; }
inline ChannelKey channel_of(const MpTriple& t) { return {t.actor, t.object}; }

inline std::string channel_label(const ChannelKey& c) {
    return actor_label(c.actor) + ", " + object_label(c.object);
}

// ---------------------------------------------------------------------------
// Gestures, tasks, trials
// ---------------------------------------------------------------------------

// Closed vocabulary G1..G15; anything else is a parse error.
struct GestureId {
    int value = 0;

    std::string label() const { return "G" + std::to_string(value); }

    auto operator<=>(const GestureId&) const = default;
};

inline std::optional<GestureId> parse_gesture_id(std::string_view s) {
    if (s.size() < 2 || s.size() > 3 || s[0] != 'G') return std::nullopt;
    int v = 0;
    for (char c : s.substr(1)) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    if (v < 1 || v > 15) return std::nullopt;
    return GestureId{v};
}

struct GestureInstance {
    GestureId id;
    Frame start_frame = 0;
    Frame end_frame = 0;  // inclusive
    int ordinal = 0;      // position within the trial transcript

    auto operator<=>(const GestureInstance&) const = default;
};

enum class Task { Suturing, NeedlePassing, KnotTying };

inline constexpr std::array<Task, 3> kAllTasks = {Task::Suturing, Task::NeedlePassing,
                                                  Task::KnotTying};

inline std::string_view task_label(Task t) {
    switch (t) {
        case Task::Suturing: return "Suturing";
        case Task::NeedlePassing: return "NeedlePassing";
        case Task::KnotTying: return "KnotTying";
    }
    return "?";
}

inline std::string_view task_short_label(Task t) {
    switch (t) {
        case Task::Suturing: return "S";
        case Task::NeedlePassing: return "NP";
        case Task::KnotTying: return "KT";
    }
    return "?";
}

inline std::optional<Task> parse_task(std::string_view s) {
    for (Task t : kAllTasks)
        if (s == task_label(t) || s == task_short_label(t)) return t;
    if (s == "Needle_Passing") return Task::NeedlePassing;
    if (s == "Knot_Tying") return Task::KnotTying;
    return std::nullopt;
}

enum class Skill { Novice, Intermediate, Expert };

inline constexpr std::array<Skill, 3> kAllSkills = {Skill::Novice, Skill::Intermediate,
                                                    Skill::Expert};

inline std::string_view skill_label(Skill s) {
    switch (s) {
        case Skill::Novice: return "Novice";
        case Skill::Intermediate: return "Intermediate";
        case Skill::Expert: return "Expert";
    }
    return "?";
}

inline std::optional<Skill> parse_skill(std::string_view s) {
    auto eq_ci = [](std::string_view a, std::string_view b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i) {
            char ca = a[i], cb = b[i];
            if (ca >= 'A' && ca <= 'Z') ca = char(ca - 'A' + 'a');
            if (cb >= 'A' && cb <= 'Z') cb = char(cb - 'A' + 'a');
            if (ca != cb) return false;
        }
        return true;
    };
    if (eq_ci(s, "N") || eq_ci(s, "Novice")) return Skill::Novice;
    if (eq_ci(s, "I") || eq_ci(s, "Intermediate")) return Skill::Intermediate;
    if (eq_ci(s, "E") || eq_ci(s, "Expert")) return Skill::Expert;
    return std::nullopt;
}

inline constexpr int kSubscoreCount = 6;

// CSV column keys and display names, in fixed order. grs_total is the sum
// score reported alongside them.
inline constexpr std::array<std::string_view, kSubscoreCount> kSubscoreKeys = {
    "respect_for_tissue",   "suture_needle_handling",  "time_and_motion",
    "flow_of_operation",    "overall_performance",     "quality_of_final_product"};

inline constexpr std::array<std::string_view, kSubscoreCount> kSubscoreNames = {
    "Respect for tissue",   "Suture/needle handling",  "Time and motion",
    "Flow of operation",    "Overall performance",     "Quality of final product"};

struct TrialRecord {
    Task task = Task::Suturing;
    std::string subject;
    int trial_index = 0;
    Skill skill = Skill::Novice;
    double grs_total = 0;
    std::array<double, kSubscoreCount> subscores{};
    double fps = 30.0;

    auto operator<=>(const TrialRecord&) const = default;
};

struct TrialId {
    Task task = Task::Suturing;
    std::string subject;
    int trial_index = 0;

    std::string str() const {
        return std::string(task_label(task)) + "_" + subject + "_" + std::to_string(trial_index);
    }

    auto operator<=>(const TrialId&) const = default;
};

inline TrialId trial_id_of(const TrialRecord& r) { return {r.task, r.subject, r.trial_index}; }

// ---------------------------------------------------------------------------
// Canonical (surgeon-defined) sequences
// ---------------------------------------------------------------------------

struct CanonicalEntry {
    Task task = Task::Suturing;
    GestureId gesture;
    std::vector<MpTriple> pattern;  // non-empty

    auto operator<=>(const CanonicalEntry&) const = default;
};

/// The built-in surgeon-defined MP sequence table: 14 entries covering
/// G2,G3,G4,G6,G8 for Suturing and Needle Passing and G12..G15 for Knot Tying.
inline const std::vector<CanonicalEntry>& builtin_canonical_table() {
    static const std::vector<CanonicalEntry> table = [] {
        const Actor L = Actor::tool_l();
        const Actor R = Actor::tool_r();
        const TargetObject N = TargetObject::needle();
        const Actor AN = Actor::of_object(N);  // needle as the mover
        const TargetObject Th = TargetObject::thread();
        const TargetObject Fa = TargetObject::fabric();
        const TargetObject Ri = TargetObject::ring();
        using V = Verb;
        std::vector<CanonicalEntry> t;
        auto add = [&](Task task, int g, std::vector<MpTriple> pat) {
            t.push_back({task, GestureId{g}, std::move(pat)});
        };
        add(Task::Suturing, 2, {{V::Touch, AN, Fa}});
        add(Task::Suturing, 3, {{V::Touch, AN, Fa}, {V::Push, R, N}, {V::Grasp, L, N}});
        add(Task::Suturing, 4, {{V::Grasp, R, N}, {V::Release, L, N}});
        add(Task::Suturing, 6, {{V::Grasp, L, N}, {V::Release, R, N}, {V::Pull, L, N}});
        add(Task::Suturing, 8,
            {{V::Grasp, L, N}, {V::Release, R, N}, {V::Grasp, R, N}, {V::Release, L, N}});
        add(Task::NeedlePassing, 2, {{V::Release, L, N}, {V::Touch, AN, Ri}, {V::Push, AN, Ri}});
        add(Task::NeedlePassing, 3, {{V::Grasp, L, N}});
        add(Task::NeedlePassing, 4, {{V::Grasp, R, N}});
        add(Task::NeedlePassing, 6, {{V::Release, R, N}, {V::Pull, L, N}});
        add(Task::NeedlePassing, 8, {{V::Release, R, N}, {V::Grasp, R, N}});
        add(Task::KnotTying, 12, {{V::Grasp, L, Th}, {V::Release, R, Th}});
        add(Task::KnotTying, 13, {{V::Pull, L, Th}, {V::Touch, R, Th}});
        add(Task::KnotTying, 14, {{V::Grasp, R, Th}});
        add(Task::KnotTying, 15, {{V::Pull, L, Th}, {V::Pull, R, Th}});
        return t;
    }();
    return table;
}

inline const CanonicalEntry* find_canonical(const std::vector<CanonicalEntry>& table, Task task,
                                            GestureId gesture) {
    for (const auto& e : table)
        if (e.task == task && e.gesture == gesture) return &e;
    return nullptr;
}

/// Gesture IDs that have a canonical entry for the task, ascending.
inline std::vector<GestureId> canonical_gestures(const std::vector<CanonicalEntry>& table,
                                                 Task task) {
    std::vector<GestureId> out;
    for (const auto& e : table)
        if (e.task == task) out.push_back(e.gesture);
    for (size_t i = 1; i < out.size(); ++i)
        for (size_t j = i; j > 0 && out[j] < out[j - 1]; --j) std::swap(out[j], out[j - 1]);
    return out;
}

/// Greedy left-to-right subsequence match of a frame-free pattern against a
/// sequence. Returns the matched indices only when the full pattern matches;
/// a partial match consumes nothing.
inline std::optional<std::vector<std::size_t>> match_pattern_subsequence(
    std::span<const MotionPrimitive> seq, std::span<const MpTriple> pattern) {
    std::vector<std::size_t> hit;
    hit.reserve(pattern.size());
    std::size_t pos = 0;
    for (const MpTriple& want : pattern) {
        while (pos < seq.size() && seq[pos].triple() != want) ++pos;
        if (pos == seq.size()) return std::nullopt;
        hit.push_back(pos++);
    }
    return hit;
}

// ---------------------------------------------------------------------------
// Inverse MP instances
// ---------------------------------------------------------------------------

// Grouping identity of an inverse pair: the unordered verb pair plus the
// shared channel with Fabric/Ring collapsed. The needle-extraction type
// records the pulling tool instead of a shared actor.
struct InverseTypeKey {
    enum class Kind { ChannelPair, PushPull };

    Kind kind = Kind::ChannelPair;
    Verb first_verb = Verb::Touch;   // lower enum value of the pair
    Verb second_verb = Verb::Untouch;
    Actor actor;                     // ChannelPair: shared actor; PushPull: pulling tool
    ObjectClass object;              // ChannelPair: shared object class; PushPull: push target class

    std::string label() const {
        const std::string cls = object_class_label(object);
        if (kind == Kind::PushPull)
            return "Push(Needle, " + cls + ") Pull(" + actor_label(actor) + ", Needle)";
        const std::string at = actor_label(actor);
        return std::string(verb_label(first_verb)) + "(" + at + ", " + cls + ") " +
               std::string(verb_label(second_verb)) + "(" + at + ", " + cls + ")";
    }

    auto operator<=>(const InverseTypeKey&) const = default;
};

// A detected negating pair (or, in run counting, a whole alternating run).
// members are channel-ordered; duration sums the members' durations.
struct InverseInstance {
    InverseTypeKey type;
    std::vector<MotionPrimitive> members;  // >= 2; exactly 2 outside MaximalRun counting
    TrialId trial;
    std::optional<GestureInstance> gesture;  // attribution context, if any
    Frame duration_frames = 0;

    auto operator<=>(const InverseInstance&) const = default;
};

// ---------------------------------------------------------------------------
// Correlation results
// ---------------------------------------------------------------------------

struct CorrelationResult {
    double rho = 0;
    double p_value = 1;
    int n = 0;

    auto operator<=>(const CorrelationResult&) const = default;
};

}  // namespace mpscope
