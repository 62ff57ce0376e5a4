#include "studyu/error_map.hpp"

namespace studyu {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDocument:
        case ErrorCode::UnknownField:
        case ErrorCode::TypeMismatch:
        case ErrorCode::BadRequest:
            return 400;
        case ErrorCode::Unauthorized:
            return 401;
        case ErrorCode::NotFound:
        case ErrorCode::UserUnknown:
            return 404;
        case ErrorCode::RevisionConflict:
        case ErrorCode::AlreadyPublished:
        case ErrorCode::StudyNotPublished:
        case ErrorCode::DuplicateResult:
        case ErrorCode::EnrollmentNotActive:
            return 409;
        case ErrorCode::ValidationFailed:
        case ErrorCode::UnknownQuestion:
        case ErrorCode::OutOfOrderAnswer:
        case ErrorCode::IncompleteQuestionnaire:
        case ErrorCode::InvalidAnswer:
        case ErrorCode::SameIntervention:
        case ErrorCode::DayOutOfRange:
        case ErrorCode::UnscheduledCompletion:
        case ErrorCode::UnknownProperty:
        case ErrorCode::EmptySeries:
        case ErrorCode::TooFewSamples:
        case ErrorCode::RankDeficient:
        case ErrorCode::InsufficientData:
        case ErrorCode::NotEligible:
        case ErrorCode::ConsentRequired:
        case ErrorCode::TooManyInterventions:
        case ErrorCode::TooFewInterventions:
        case ErrorCode::UnknownIntervention:
        case ErrorCode::UnscheduledTask:
        case ErrorCode::PayloadMismatch:
        case ErrorCode::LateSubmission:
            return 422;
        case ErrorCode::StorageUnavailable:
            return 503;
        case ErrorCode::BindFailure:
            return 500;
    }
    return 500;
}

ApiError map_error(const Error& error) {
    return {http_status(error.code()), std::string(error_name(error.code())), error.what(), error.details()};
}

nlohmann::json ApiError::body() const {
    nlohmann::json j{{"code", code}, {"message", message}};
    if (!details.is_null()) j["details"] = details;
    return j;
}

} // namespace studyu
