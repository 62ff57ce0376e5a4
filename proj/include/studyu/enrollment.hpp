#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "studyu/expression.hpp"
#include "studyu/schedule.hpp"
#include "studyu/study_model.hpp"
#include "studyu/time.hpp"

namespace studyu {

enum class EnrollmentStatus { Active, Finished, OptedOut };

std::string_view to_token(EnrollmentStatus s);

/// Payload of a checkmark task.
struct CheckmarkCompleted {
    friend bool operator==(const CheckmarkCompleted&, const CheckmarkCompleted&) = default;
};

using ResultPayload = std::variant<CheckmarkCompleted, AnswerSet>;

struct TaskResult {
    std::string result_id;
    std::string task_id;
    int study_day = 1;
    Timestamp completed_at{};
    ResultPayload payload;

    friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

/// One participant's run of one study: an immutable copy of the study as it
/// was at enrollment, the two compared interventions, the generated phase
/// sequence, and the append-only task results.
struct Enrollment {
    std::string enrollment_id;
    std::string user_id;
    std::string study_id;
    std::int64_t study_revision = 0;
    std::shared_ptr<const Study> snapshot;
    std::array<std::string, 2> selections;
    PhaseSequence phase_sequence;
    AnswerSet eligibility_answers;
    Timestamp consent_given_at{};
    Date started_on{};
    int utc_offset_minutes = 0;
    EnrollmentStatus status = EnrollmentStatus::Active;
    std::vector<TaskResult> results;

    const StudyDetails& details() const { return snapshot->details; }

    /// 1-based study day containing `now` in the participant's local time.
    int study_day_at(Timestamp now) const;

    CompletionSet completions() const;
};

nlohmann::json encode_phase_sequence(const PhaseSequence& seq);
PhaseSequence decode_phase_sequence(const nlohmann::json& node);

nlohmann::json encode_task_result(const TaskResult& result);
TaskResult decode_task_result(const nlohmann::json& node);

/// Result payload as sent by clients: {"type":"completed"} or
/// {"type":"answers","answers":[...]}. Throws on malformed input.
ResultPayload decode_result_payload(const nlohmann::json& node, const std::string& path);

/// Everything except the snapshot and the results.
nlohmann::json encode_enrollment_header(const Enrollment& e);
Enrollment decode_enrollment_header(const nlohmann::json& node);

} // namespace studyu
