#include "studyu/schedule.hpp"

#include <algorithm>
#include <map>

#include "studyu/error.hpp"

namespace studyu {

const Phase& PhaseSequence::phase_for_day(int study_day) const {
    if (study_day < 1 || study_day > total_days) {
        throw Error(ErrorCode::DayOutOfRange, "study day " + std::to_string(study_day) + " outside 1.." +
                                                  std::to_string(total_days));
    }
    const Phase& p = phases[static_cast<std::size_t>((study_day - 1) / phases.front().length_days)];
    return p;
}

PhaseSequence generate_phase_sequence(const StudySchedule& schedule, const std::string& a,
                                      const std::string& b, std::uint64_t seed) {
    if (a == b) throw Error(ErrorCode::SameIntervention, "the two compared interventions must differ");

    PhaseSequence seq;
    seq.seed = seed;
    seq.intervention_a = a;
    seq.intervention_b = b;
    const int len = schedule.phase_duration_days;
    auto push = [&](std::optional<std::string> intervention) {
        const int index = static_cast<int>(seq.phases.size());
        seq.phases.push_back(Phase{index, std::move(intervention), index * len + 1, len});
    };

    if (schedule.include_baseline) push(std::nullopt);
    SplitMix64 stream(seed);
    for (int cycle = 0; cycle < schedule.number_of_cycles; ++cycle) {
        bool reversed = false;
        switch (schedule.sequence) {
            case SequenceKind::Alternating: reversed = false; break;
            case SequenceKind::Counterbalanced: reversed = (cycle % 2) == 1; break;
            case SequenceKind::Randomized: reversed = (stream.next() >> 63) != 0; break;
        }
        push(reversed ? b : a);
        push(reversed ? a : b);
    }
    seq.total_days = total_duration_days(schedule);
    return seq;
}

bool DayPlan::includes(std::string_view task_id) const {
    return std::any_of(tasks.begin(), tasks.end(), [&](const PlannedTask& t) { return t.task_id == task_id; });
}

DayPlan day_plan(const PhaseSequence& sequence, const StudyDetails& study, int study_day, Date start_date) {
    const Phase& phase = sequence.phase_for_day(study_day);
    DayPlan plan;
    plan.study_day = study_day;
    plan.calendar_date = start_date + std::chrono::days{study_day - 1};
    plan.phase_index = phase.phase_index;
    plan.active_intervention = phase.intervention_id;
    if (phase.intervention_id) {
        const Intervention* iv = study.find_intervention(*phase.intervention_id);
        if (iv == nullptr) {
            throw Error(ErrorCode::UnknownIntervention, "unknown intervention \"" + *phase.intervention_id + "\"");
        }
        for (const Task& t : iv->tasks) plan.tasks.push_back({t.task_id, TaskKind::Intervention, t.schedule});
    }
    for (const Observation& o : study.observations) {
        plan.tasks.push_back({o.task.task_id, TaskKind::Observation, o.task.schedule});
    }
    std::stable_sort(plan.tasks.begin(), plan.tasks.end(), [](const PlannedTask& x, const PlannedTask& y) {
        // Tasks without windows can be done any time; list them last.
        if (x.windows.empty() || y.windows.empty()) return !x.windows.empty() && y.windows.empty();
        return x.windows.front().start < y.windows.front().start;
    });
    return plan;
}

std::set<int> countable_days(const PhaseSequence& sequence, const StudyDetails& study,
                             const CompletionSet& completions) {
    std::map<int, std::vector<std::string>> by_day;
    for (const auto& [day, task_id] : completions) {
        if (day < 1 || day > sequence.total_days) {
            throw Error(ErrorCode::UnscheduledCompletion, "completion on day " + std::to_string(day) + " outside the study");
        }
        by_day[day].push_back(task_id);
    }
    std::set<int> out;
    for (const auto& [day, done] : by_day) {
        const DayPlan plan = day_plan(sequence, study, day);
        bool all_interventions = true;
        bool any_observation = false;
        for (const std::string& id : done) {
            if (!plan.includes(id)) {
                throw Error(ErrorCode::UnscheduledCompletion,
                            "task \"" + id + "\" is not scheduled on day " + std::to_string(day));
            }
        }
        for (const PlannedTask& t : plan.tasks) {
            const bool completed = std::find(done.begin(), done.end(), t.task_id) != done.end();
            if (t.kind == TaskKind::Intervention) all_interventions = all_interventions && completed;
            else any_observation = any_observation || completed;
        }
        if (all_interventions && any_observation) out.insert(day);
    }
    return out;
}

ProgressSummary progress(const PhaseSequence& sequence, const StudyDetails& study,
                         const CompletionSet& completions, int today) {
    ProgressSummary summary;
    summary.days_elapsed = std::clamp(today, 0, sequence.total_days);
    summary.required_days = study.minimum_study_length_days;

    CompletionSet to_date;
    for (const auto& c : completions) {
        if (c.first <= summary.days_elapsed) to_date.insert(c);
    }
    const std::set<int> countable = countable_days(sequence, study, to_date);
    summary.countable_days = static_cast<int>(countable.size());
    summary.power_reached = summary.countable_days >= summary.required_days;

    for (const Phase& p : sequence.phases) {
        const auto first = countable.lower_bound(p.start_day);
        const auto last = countable.upper_bound(p.end_day());
        summary.per_phase.push_back({p.phase_index, static_cast<int>(std::distance(first, last)), p.length_days});
    }

    // Selected interventions' tasks in phase order of first appearance, then observations.
    std::vector<std::string> task_order;
    for (const Phase& p : sequence.phases) {
        if (!p.intervention_id) continue;
        if (const Intervention* iv = study.find_intervention(*p.intervention_id)) {
            for (const Task& t : iv->tasks) {
                if (std::find(task_order.begin(), task_order.end(), t.task_id) == task_order.end()) {
                    task_order.push_back(t.task_id);
                }
            }
        }
    }
    for (const Observation& o : study.observations) task_order.push_back(o.task.task_id);

    std::map<std::string, TaskCount> counts;
    for (const auto& id : task_order) counts[id].task_id = id;
    for (int day = 1; day <= summary.days_elapsed; ++day) {
        for (const PlannedTask& t : day_plan(sequence, study, day).tasks) ++counts[t.task_id].scheduled_to_date;
    }
    for (const auto& c : to_date) ++counts[c.second].completed;
    for (const auto& id : task_order) summary.per_task_counts.push_back(counts[id]);
    return summary;
}

} // namespace studyu
