#include "studyu/study_model.hpp"

#include <algorithm>
#include <cmath>

namespace studyu {

Expression Expression::value(std::string question_id, Condition condition) {
    return Expression{Value{std::move(question_id), std::move(condition)}};
}

Expression Expression::negate(Expression inner) {
    return Expression{Not{std::make_shared<const Expression>(std::move(inner))}};
}

int Expression::depth() const {
    int d = 1;
    for (const Expression* e = this; e->is_not(); e = &e->inner()) ++d;
    return d;
}

bool operator==(const Expression& a, const Expression& b) {
    if (a.is_value() != b.is_value()) return false;
    if (a.is_value()) return a.as_value() == b.as_value();
    return a.inner() == b.inner();
}

long long SliderConfig::grid_steps() const {
    return std::llround((maximum - minimum) / step);
}

double SliderConfig::grid_value(long long k) const {
    if (k >= grid_steps()) return maximum;
    if (k <= 0) return minimum;
    return minimum + static_cast<double>(k) * step;
}

AnswerValue Question::effective_default() const {
    if (default_answer) return *default_answer;
    switch (type) {
        case QuestionType::Boolean: return false;
        case QuestionType::Choice: return std::set<std::string>{};
        case QuestionType::VisualAnalogue:
        case QuestionType::AnnotatedScale: return slider ? slider->initial : 0.0;
    }
    return false;
}

const Question* Task::find_question(std::string_view question_id) const {
    auto it = std::find_if(questions.begin(), questions.end(),
                           [&](const Question& q) { return q.question_id == question_id; });
    return it == questions.end() ? nullptr : &*it;
}

const DataReference& ReportSection::reference() const {
    return std::visit([](const auto& s) -> const DataReference& { return s.reference; }, body);
}

const Intervention* StudyDetails::find_intervention(std::string_view intervention_id) const {
    for (const auto& i : interventions.interventions) {
        if (i.intervention_id == intervention_id) return &i;
    }
    return nullptr;
}

const Task* StudyDetails::find_task(std::string_view task_id) const {
    for (const auto& i : interventions.interventions) {
        for (const auto& t : i.tasks) {
            if (t.task_id == task_id) return &t;
        }
    }
    for (const auto& o : observations) {
        if (o.task.task_id == task_id) return &o.task;
    }
    return nullptr;
}

bool StudyDetails::is_observation_task(std::string_view task_id) const {
    return std::any_of(observations.begin(), observations.end(),
                       [&](const Observation& o) { return o.task.task_id == task_id; });
}

std::optional<ValueKind> property_kind(const Task& task, std::string_view property_id) {
    if (task.type == TaskType::Checkmark) {
        if (property_id == kCompletedProperty) return ValueKind::Boolean;
        return std::nullopt;
    }
    const Question* q = task.find_question(property_id);
    if (q == nullptr) return std::nullopt;
    switch (q->type) {
        case QuestionType::Boolean: return ValueKind::Boolean;
        case QuestionType::VisualAnalogue:
        case QuestionType::AnnotatedScale: return ValueKind::Numeric;
        case QuestionType::Choice: return std::nullopt;
    }
    return std::nullopt;
}

std::optional<AnswerValue> conform_answer(const Question& question, const AnswerValue& value,
                                          std::string* reason) {
    auto reject = [&](const char* why) -> std::optional<AnswerValue> {
        if (reason) *reason = why;
        return std::nullopt;
    };
    switch (question.type) {
        case QuestionType::Boolean:
            if (!std::holds_alternative<bool>(value)) return reject("expected a yes/no answer");
            return value;
        case QuestionType::Choice: {
            const auto* selected = std::get_if<std::set<std::string>>(&value);
            if (selected == nullptr || !question.choice) return reject("expected a list of choice ids");
            if (!question.choice->multiple && selected->size() > 1) {
                return reject("single-choice question answered with several choices");
            }
            for (const auto& id : *selected) {
                const auto& choices = question.choice->choices;
                if (std::none_of(choices.begin(), choices.end(),
                                 [&](const Choice& c) { return c.choice_id == id; })) {
                    return reject("unknown choice id");
                }
            }
            return value;
        }
        case QuestionType::VisualAnalogue:
        case QuestionType::AnnotatedScale: {
            const auto* number = std::get_if<double>(&value);
            if (number == nullptr || !question.slider) return reject("expected a number");
            const SliderConfig& s = *question.slider;
            const double k_real = (*number - s.minimum) / s.step;
            const long long k = std::llround(k_real);
            if (!std::isfinite(k_real) || std::fabs(k_real - static_cast<double>(k)) > kGridTolerance) {
                return reject("value is not on the slider grid");
            }
            if (k < 0 || k > s.grid_steps()) return reject("value outside the slider range");
            return AnswerValue{s.grid_value(k)};
        }
    }
    return reject("unsupported question type");
}

int total_duration_days(const StudySchedule& schedule) {
    return schedule.phase_duration_days *
           (2 * schedule.number_of_cycles + (schedule.include_baseline ? 1 : 0));
}

} // namespace studyu
