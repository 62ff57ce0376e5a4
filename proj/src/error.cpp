#include "studyu/error.hpp"

namespace studyu {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDocument: return "malformed_document";
        case ErrorCode::UnknownField: return "unknown_field";
        case ErrorCode::TypeMismatch: return "type_mismatch";
        case ErrorCode::ValidationFailed: return "validation_failed";
        case ErrorCode::UnknownQuestion: return "unknown_question";
        case ErrorCode::OutOfOrderAnswer: return "out_of_order_answer";
        case ErrorCode::IncompleteQuestionnaire: return "incomplete_questionnaire";
        case ErrorCode::InvalidAnswer: return "invalid_answer";
        case ErrorCode::SameIntervention: return "same_intervention";
        case ErrorCode::DayOutOfRange: return "day_out_of_range";
        case ErrorCode::UnscheduledCompletion: return "unscheduled_completion";
        case ErrorCode::UnknownProperty: return "unknown_property";
        case ErrorCode::EmptySeries: return "empty_series";
        case ErrorCode::TooFewSamples: return "too_few_samples";
        case ErrorCode::RankDeficient: return "rank_deficient";
        case ErrorCode::InsufficientData: return "insufficient_data";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::RevisionConflict: return "revision_conflict";
        case ErrorCode::AlreadyPublished: return "already_published";
        case ErrorCode::StudyNotPublished: return "study_not_published";
        case ErrorCode::UserUnknown: return "user_unknown";
        case ErrorCode::NotEligible: return "not_eligible";
        case ErrorCode::ConsentRequired: return "consent_required";
        case ErrorCode::TooManyInterventions: return "too_many_interventions";
        case ErrorCode::TooFewInterventions: return "too_few_interventions";
        case ErrorCode::UnknownIntervention: return "unknown_intervention";
        case ErrorCode::DuplicateResult: return "duplicate_result";
        case ErrorCode::UnscheduledTask: return "unscheduled_task";
        case ErrorCode::PayloadMismatch: return "payload_mismatch";
        case ErrorCode::LateSubmission: return "late_submission";
        case ErrorCode::EnrollmentNotActive: return "enrollment_not_active";
        case ErrorCode::StorageUnavailable: return "storage_unavailable";
        case ErrorCode::Unauthorized: return "unauthorized";
        case ErrorCode::BadRequest: return "bad_request";
        case ErrorCode::BindFailure: return "bind_failure";
    }
    return "unknown";
}

std::optional<ErrorCode> error_from_name(std::string_view name) {
    for (ErrorCode code : kAllErrorCodes) {
        if (error_name(code) == name) return code;
    }
    return std::nullopt;
}

} // namespace studyu
