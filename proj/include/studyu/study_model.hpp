#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "studyu/time.hpp"

namespace studyu {

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

struct Contact {
    std::string organization;
    std::string researcher_name;
    std::string email;
    std::string website;

    friend bool operator==(const Contact&, const Contact&) = default;
};

struct Irb {
    std::string board_name;
    std::string protocol_number;

    friend bool operator==(const Irb&, const Irb&) = default;
};

struct StudyMetadata {
    std::string study_id;
    std::string title;
    std::string description;
    std::string icon_name;
    Contact contact;
    Irb irb;
    bool published = false;
    std::int64_t revision = 0;

    friend bool operator==(const StudyMetadata&, const StudyMetadata&) = default;
};

// ---------------------------------------------------------------------------
// Answers and expressions
// ---------------------------------------------------------------------------

/// bool for boolean questions, selected choice ids for choice questions,
/// a grid value for slider questions.
using AnswerValue = std::variant<bool, std::set<std::string>, double>;

struct Answer {
    std::string question_id;
    AnswerValue value;
    Timestamp answered_at{};

    friend bool operator==(const Answer&, const Answer&) = default;
};

enum class Comparison { Less, LessEqual, Equal, GreaterEqual, Greater };

struct BooleanEquals {
    bool value = true;
    friend bool operator==(const BooleanEquals&, const BooleanEquals&) = default;
};

struct ChoiceSelected {
    std::string choice_id;
    friend bool operator==(const ChoiceSelected&, const ChoiceSelected&) = default;
};

struct NumericCompare {
    Comparison op = Comparison::Equal;
    double value = 0.0;
    friend bool operator==(const NumericCompare&, const NumericCompare&) = default;
};

using Condition = std::variant<BooleanEquals, ChoiceSelected, NumericCompare>;

/// Boolean expression over answers. Closed to two node kinds: a value test
/// against one question, and negation. Conjunction is expressed by listing
/// several eligibility criteria; there is no disjunction.
class Expression {
public:
    struct Value {
        std::string question_id;
        Condition condition;
        friend bool operator==(const Value&, const Value&) = default;
    };

    static Expression value(std::string question_id, Condition condition);
    static Expression negate(Expression inner);

    bool is_value() const { return std::holds_alternative<Value>(node_); }
    bool is_not() const { return !is_value(); }
    const Value& as_value() const { return std::get<Value>(node_); }
    const Expression& inner() const { return *std::get<Not>(node_).inner; }

    /// Number of nodes on the longest root-to-leaf path.
    int depth() const;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    struct Not {
        std::shared_ptr<const Expression> inner;
    };

    explicit Expression(std::variant<Value, Not> node) : node_(std::move(node)) {}

    std::variant<Value, Not> node_;
};

// ---------------------------------------------------------------------------
// Questions
// ---------------------------------------------------------------------------

enum class QuestionType { Boolean, Choice, VisualAnalogue, AnnotatedScale };

struct Choice {
    std::string choice_id;
    std::string text;
    friend bool operator==(const Choice&, const Choice&) = default;
};

struct ChoiceConfig {
    bool multiple = false;
    std::vector<Choice> choices;
    friend bool operator==(const ChoiceConfig&, const ChoiceConfig&) = default;
};

struct Annotation {
    double value = 0.0;
    std::string text;
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Gradient {
    std::string min_color;  // #RRGGBB
    std::string max_color;
    friend bool operator==(const Gradient&, const Gradient&) = default;
};

struct SliderConfig {
    double minimum = 0.0;
    double maximum = 1.0;
    double initial = 0.0;
    double step = 1.0;
    std::vector<Annotation> annotations;
    std::optional<Gradient> gradient;

    /// Number of grid steps between minimum and maximum.
    long long grid_steps() const;
    /// Value of grid point k. Every stored numeric answer is produced here.
    double grid_value(long long k) const;

    friend bool operator==(const SliderConfig&, const SliderConfig&) = default;
};

/// Tolerance for grid divisibility and answer snapping.
inline constexpr double kGridTolerance = 1e-9;

struct Question {
    std::string question_id;
    std::string prompt;
    std::string rationale;
    QuestionType type = QuestionType::Boolean;
    std::optional<ChoiceConfig> choice;  // present iff type == Choice
    std::optional<SliderConfig> slider;  // present iff slider type
    std::optional<Expression> conditional;
    std::optional<AnswerValue> default_answer;

    bool is_slider() const {
        return type == QuestionType::VisualAnalogue || type == QuestionType::AnnotatedScale;
    }

    /// The answer substituted when the question is skipped: the explicit
    /// default if set, else false / no selection / the slider's initial value.
    AnswerValue effective_default() const;

    friend bool operator==(const Question&, const Question&) = default;
};

// ---------------------------------------------------------------------------
// Interventions, observations, tasks
// ---------------------------------------------------------------------------

enum class TaskType { Checkmark, Questionnaire };

struct TimeWindow {
    TimeOfDay start;
    TimeOfDay end;
    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct Task {
    std::string task_id;
    std::string title;
    TaskType type = TaskType::Checkmark;
    std::vector<TimeWindow> schedule;
    std::vector<Question> questions;  // questionnaire only

    const Question* find_question(std::string_view question_id) const;

    friend bool operator==(const Task&, const Task&) = default;
};

/// Property exposed by every checkmark task.
inline constexpr std::string_view kCompletedProperty = "completed";

struct Intervention {
    std::string intervention_id;
    std::string name;
    std::string description;
    std::string icon_name;
    std::vector<Task> tasks;
    friend bool operator==(const Intervention&, const Intervention&) = default;
};

struct InterventionSet {
    std::vector<Intervention> interventions;
    friend bool operator==(const InterventionSet&, const InterventionSet&) = default;
};

struct Observation {
    std::string observation_id;
    std::string title;
    Task task;  // always a questionnaire
    friend bool operator==(const Observation&, const Observation&) = default;
};

struct EligibilityCriterion {
    std::string criterion_id;
    std::string reason;
    Expression expression = Expression::value({}, BooleanEquals{});
    friend bool operator==(const EligibilityCriterion&, const EligibilityCriterion&) = default;
};

// ---------------------------------------------------------------------------
// Schedule, consent, reports, results
// ---------------------------------------------------------------------------

enum class SequenceKind { Alternating, Counterbalanced, Randomized };

struct StudySchedule {
    int number_of_cycles = 1;
    int phase_duration_days = 1;
    bool include_baseline = false;
    SequenceKind sequence = SequenceKind::Alternating;
    friend bool operator==(const StudySchedule&, const StudySchedule&) = default;
};

struct ConsentItem {
    std::string item_id;
    std::string title;
    std::string text;
    std::string icon_name;
    friend bool operator==(const ConsentItem&, const ConsentItem&) = default;
};

enum class ValueKind { Numeric, Boolean };

struct DataReference {
    std::string task_id;
    std::string property_id;
    ValueKind kind = ValueKind::Numeric;
    friend bool operator==(const DataReference&, const DataReference&) = default;
};

enum class Aggregate { Day, Phase, Intervention };
enum class ImprovementDirection { HigherIsBetter, LowerIsBetter };

struct AverageSection {
    DataReference reference;
    Aggregate aggregate = Aggregate::Intervention;
    friend bool operator==(const AverageSection&, const AverageSection&) = default;
};

struct LinearRegressionSection {
    DataReference reference;
    ImprovementDirection improvement = ImprovementDirection::HigherIsBetter;
    friend bool operator==(const LinearRegressionSection&,
                           const LinearRegressionSection&) = default;
};

struct ReportSection {
    std::string section_id;
    std::string title;
    std::variant<AverageSection, LinearRegressionSection> body;

    const DataReference& reference() const;

    friend bool operator==(const ReportSection&, const ReportSection&) = default;
};

struct ReportSpecification {
    ReportSection primary;
    std::vector<ReportSection> secondary;
    friend bool operator==(const ReportSpecification&, const ReportSpecification&) = default;
};

struct StudyResult {
    std::string export_id;
    DataReference reference;
    std::string column_name;
    friend bool operator==(const StudyResult&, const StudyResult&) = default;
};

struct StudyDetails {
    InterventionSet interventions;
    std::vector<Observation> observations;
    std::vector<Question> eligibility_questions;
    std::vector<EligibilityCriterion> eligibility_criteria;
    StudySchedule schedule;
    std::vector<ConsentItem> consent;
    ReportSpecification report_specification;
    std::vector<StudyResult> results;
    int minimum_study_length_days = 1;

    const Intervention* find_intervention(std::string_view intervention_id) const;
    /// Searches intervention tasks and observation tasks.
    const Task* find_task(std::string_view task_id) const;
    bool is_observation_task(std::string_view task_id) const;

    friend bool operator==(const StudyDetails&, const StudyDetails&) = default;
};

struct Study {
    StudyMetadata metadata;
    StudyDetails details;
    friend bool operator==(const Study&, const Study&) = default;
};

/// Kind of value a task property yields, or nullopt if the property does not
/// exist or is not reportable (choice questions).
std::optional<ValueKind> property_kind(const Task& task, std::string_view property_id);

/// Checks `value` against the question and returns its canonical form:
/// numeric values within kGridTolerance of a grid point are snapped onto it.
/// Returns nullopt (and a reason, if requested) when the value does not fit.
std::optional<AnswerValue> conform_answer(const Question& question, const AnswerValue& value,
                                          std::string* reason = nullptr);

/// Total study length in days implied by a schedule.
int total_duration_days(const StudySchedule& schedule);

} // namespace studyu
