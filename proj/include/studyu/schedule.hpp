#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "studyu/study_model.hpp"
#include "studyu/time.hpp"

namespace studyu {

/// SplitMix64 (Steele, Lea & Flood 2014). The state advances by the golden
/// gamma 0x9E3779B97F4A7C15 and each output is the state passed through the
/// mix13 finalizer. Used wherever a sequence must reproduce bit-exactly from
/// a seed on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

struct Phase {
    int phase_index = 0;
    std::optional<std::string> intervention_id;  // nullopt for the baseline
    int start_day = 1;                           // 1-based study day
    int length_days = 0;

    bool is_baseline() const { return !intervention_id.has_value(); }
    int end_day() const { return start_day + length_days - 1; }

    friend bool operator==(const Phase&, const Phase&) = default;
};

struct PhaseSequence {
    std::vector<Phase> phases;
    int total_days = 0;
    std::uint64_t seed = 0;
    std::string intervention_a;  // reference level of the A-vs-B comparison
    std::string intervention_b;

    /// Throws DayOutOfRange outside 1..total_days.
    const Phase& phase_for_day(int study_day) const;

    friend bool operator==(const PhaseSequence&, const PhaseSequence&) = default;
};

/// Lays out baseline (optional, always first) and 2 * cycles intervention
/// phases. Alternating: every cycle is [a, b]. Counterbalanced: cycle
/// orientation mirrors each time, [a, b], [b, a], [a, b], ... Randomized:
/// cycle i is [b, a] iff the top bit of the i-th SplitMix64(seed) output is
/// set. Throws SameIntervention when a == b.
PhaseSequence generate_phase_sequence(const StudySchedule& schedule, const std::string& a,
                                      const std::string& b, std::uint64_t seed);

enum class TaskKind { Intervention, Observation };

struct PlannedTask {
    std::string task_id;
    TaskKind kind = TaskKind::Observation;
    std::vector<TimeWindow> windows;
};

struct DayPlan {
    int study_day = 1;
    Date calendar_date{};
    int phase_index = 0;
    std::optional<std::string> active_intervention;  // nullopt during baseline
    std::vector<PlannedTask> tasks;                  // by first window start

    bool includes(std::string_view task_id) const;
};

/// Tasks for one study day: the active intervention's tasks plus every
/// observation. Throws DayOutOfRange outside 1..total_days.
DayPlan day_plan(const PhaseSequence& sequence, const StudyDetails& study, int study_day,
                 Date start_date = {});

/// (study_day, task_id) pairs of completed task instances.
using CompletionSet = std::set<std::pair<int, std::string>>;

/// A day is countable iff every intervention task scheduled on it was
/// completed and at least one observation was completed. Baseline days need
/// only the observation. Throws UnscheduledCompletion for completions of
/// tasks not scheduled on their day.
std::set<int> countable_days(const PhaseSequence& sequence, const StudyDetails& study,
                             const CompletionSet& completions);

struct PhaseProgress {
    int phase_index = 0;
    int completed_days = 0;  // countable days within the phase
    int length_days = 0;
};

struct TaskCount {
    std::string task_id;
    int completed = 0;
    int scheduled_to_date = 0;
};

struct ProgressSummary {
    int days_elapsed = 0;
    int countable_days = 0;
    int required_days = 0;
    std::vector<PhaseProgress> per_phase;
    bool power_reached = false;
    std::vector<TaskCount> per_task_counts;
};

/// Progress as of study day `today` (days beyond the study are clamped).
ProgressSummary progress(const PhaseSequence& sequence, const StudyDetails& study,
                         const CompletionSet& completions, int today);

} // namespace studyu
