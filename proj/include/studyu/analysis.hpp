#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "studyu/enrollment.hpp"
#include "studyu/error.hpp"
#include "studyu/ols.hpp"
#include "studyu/schedule.hpp"

namespace studyu {

struct SeriesPoint {
    int study_day = 1;
    Timestamp timestamp{};
    double value = 0.0;
};

struct TimeSeries {
    std::vector<SeriesPoint> points;  // study_day non-decreasing
    DataReference source;
};

/// One point per completed task instance exposing the referenced property.
/// Booleans map to 0/1; a checkmark completion yields `completed` = 1.
/// Throws UnknownProperty or TypeMismatch.
TimeSeries resolve_data_reference(const DataReference& ref, const Enrollment& enrollment);

struct AverageBar {
    std::string label;
    std::optional<double> mean;  // empty for a group without data
    int count = 0;
};

struct AverageBars {
    std::vector<AverageBar> bars;
};

/// Arithmetic mean per day, per phase, or per intervention. Groups run
/// chronologically for day/phase and A, B, baseline for intervention; empty
/// groups are kept with count 0. Throws EmptySeries when there are no points.
AverageBars average_section(const TimeSeries& series, Aggregate aggregate, const PhaseSequence& sequence);

struct PredictedValue {
    std::string group;  // intervention id or "baseline"
    double value = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct RegressionResult {
    std::vector<PredictedValue> predicted;
    RegressionFit fit;
    double contrast = 0.0;  // B minus A
    double contrast_standard_error = 0.0;
    double mean_trend = 0.0;  // t at which predictions are evaluated
    WaldDecision decision;
    std::optional<std::string> favored_intervention;
    std::string narrative;
};

/// Linear model over countable days: one sample per day (same-day values
/// averaged). Columns: intercept, D_A and D_B with a baseline phase (baseline
/// is the reference) or D_B alone without one (A is the reference), and the
/// study day as linear trend. Predictions are taken at the mean study day.
/// Throws InsufficientData (n <= p) or RankDeficient.
RegressionResult build_regression_section(const Enrollment& enrollment, const LinearRegressionSection& section,
                                          const PhaseSequence& sequence, const std::set<int>& countable);

struct SectionError {
    ErrorCode code;
    std::string message;
};

struct SectionOutcome {
    std::string section_id;
    std::string title;
    bool primary = false;
    std::variant<AverageBars, RegressionResult, SectionError> payload;
};

struct ReportBundle {
    Timestamp generated_at{};
    bool locked = true;
    ProgressSummary progress;
    std::vector<SectionOutcome> sections;  // primary first
};

/// Report for the participant. Locked, with progress only, until the
/// minimum study length of countable days is reached unless `demo_unlock`.
/// A failing section is reported in place; it never hides the others.
ReportBundle build_report(const Enrollment& enrollment, Timestamp now, bool demo_unlock);

nlohmann::json encode_progress(const ProgressSummary& progress);
nlohmann::json encode_report_bundle(const ReportBundle& bundle);

} // namespace studyu
