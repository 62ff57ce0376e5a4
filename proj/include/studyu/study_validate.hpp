#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "studyu/study_model.hpp"

namespace studyu {

enum class Severity { Error, Warning };

struct Finding {
    std::string path;  // "$.details.eligibilityCriteria[0].expression"
    Severity severity = Severity::Error;
    std::string message;

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
    std::vector<Finding> findings;  // sorted by path

    std::size_t error_count() const;
    bool ok() const { return error_count() == 0; }
};

/// Checks every structural invariant of a study. With `for_publish` it also
/// requires an IRB protocol number, at least one consent item, and
/// eligibility questions whenever criteria exist. Pure; findings are sorted
/// by path so identical input yields an identical report.
ValidationReport validate_study(const StudyDetails& details, const StudyMetadata& metadata,
                                bool for_publish);

nlohmann::json encode_report(const ValidationReport& report);

/// One line per finding: "path: severity: message".
std::string format_report(const ValidationReport& report);

} // namespace studyu
