#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace studyu {

/// Every failure the engine, the store, and the service can report.
/// Machine names are part of the public HTTP contract (see api/error_map.hpp).
enum class ErrorCode {
    // study_model
    MalformedDocument,
    UnknownField,
    TypeMismatch,
    ValidationFailed,
    // expression_engine
    UnknownQuestion,
    OutOfOrderAnswer,
    IncompleteQuestionnaire,
    InvalidAnswer,
    // schedule_engine
    SameIntervention,
    DayOutOfRange,
    UnscheduledCompletion,
    // analysis_engine
    UnknownProperty,
    EmptySeries,
    TooFewSamples,
    RankDeficient,
    InsufficientData,
    // trial_store
    NotFound,
    RevisionConflict,
    AlreadyPublished,
    StudyNotPublished,
    UserUnknown,
    NotEligible,
    ConsentRequired,
    TooManyInterventions,
    TooFewInterventions,
    UnknownIntervention,
    DuplicateResult,
    UnscheduledTask,
    PayloadMismatch,
    LateSubmission,
    EnrollmentNotActive,
    StorageUnavailable,
    // api_service
    Unauthorized,
    BadRequest,
    BindFailure,
};

inline constexpr std::array kAllErrorCodes = {
    ErrorCode::MalformedDocument,   ErrorCode::UnknownField,
    ErrorCode::TypeMismatch,        ErrorCode::ValidationFailed,
    ErrorCode::UnknownQuestion,     ErrorCode::OutOfOrderAnswer,
    ErrorCode::IncompleteQuestionnaire, ErrorCode::InvalidAnswer,
    ErrorCode::SameIntervention,    ErrorCode::DayOutOfRange,
    ErrorCode::UnscheduledCompletion, ErrorCode::UnknownProperty,
    ErrorCode::EmptySeries,         ErrorCode::TooFewSamples,
    ErrorCode::RankDeficient,       ErrorCode::InsufficientData,
    ErrorCode::NotFound,            ErrorCode::RevisionConflict,
    ErrorCode::AlreadyPublished,    ErrorCode::StudyNotPublished,
    ErrorCode::UserUnknown,         ErrorCode::NotEligible,
    ErrorCode::ConsentRequired,     ErrorCode::TooManyInterventions,
    ErrorCode::TooFewInterventions, ErrorCode::UnknownIntervention,
    ErrorCode::DuplicateResult,     ErrorCode::UnscheduledTask,
    ErrorCode::PayloadMismatch,     ErrorCode::LateSubmission,
    ErrorCode::EnrollmentNotActive, ErrorCode::StorageUnavailable,
    ErrorCode::Unauthorized,        ErrorCode::BadRequest,
    ErrorCode::BindFailure,
};

/// Stable snake_case name, e.g. "revision_conflict".
std::string_view error_name(ErrorCode code);

/// Inverse of error_name.
std::optional<ErrorCode> error_from_name(std::string_view name);

/// Exception carrying a machine code, a human message, and optional
/// structured details (validation report, eligibility reasons, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

} // namespace studyu
