#include "studyu/study_validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "studyu/study_json.hpp"

namespace studyu {

namespace {

std::string at(const std::string& path, std::string_view member) {
    return path + "." + std::string(member);
}

std::string at(const std::string& path, std::size_t index) {
    return path + "[" + std::to_string(index) + "]";
}

class Validator {
public:
    Validator(const StudyDetails& details, const StudyMetadata& metadata, bool for_publish)
        : d_(details), m_(metadata), for_publish_(for_publish) {}

    ValidationReport run() {
        check_metadata();
        check_interventions();
        check_observations();
        check_question_list(d_.eligibility_questions, "$.details.eligibilityQuestions");
        check_criteria();
        check_schedule();
        check_consent();
        check_reports();
        check_results();
        std::stable_sort(report_.findings.begin(), report_.findings.end(),
                         [](const Finding& a, const Finding& b) {
                             if (a.path != b.path) return a.path < b.path;
                             if (a.severity != b.severity) return a.severity < b.severity;
                             return a.message < b.message;
                         });
        return std::move(report_);
    }

private:
    void error(std::string path, std::string message) {
        report_.findings.push_back({std::move(path), Severity::Error, std::move(message)});
    }
    void warning(std::string path, std::string message) {
        report_.findings.push_back({std::move(path), Severity::Warning, std::move(message)});
    }

    void require_text(const std::string& value, const std::string& path, const char* what) {
        if (value.empty()) error(path, std::string(what) + " must not be empty");
    }

    void check_metadata() {
        require_text(m_.study_id, "$.metadata.id", "study id");
        require_text(m_.title, "$.metadata.title", "title");
        if (for_publish_ && m_.irb.protocol_number.empty()) {
            error("$.metadata.irb.protocolNumber", "an IRB protocol number is required to publish");
        }
    }

    void check_task(const Task& t, const std::string& path) {
        require_text(t.task_id, at(path, "id"), "task id");
        if (!t.task_id.empty() && !task_ids_.insert(t.task_id).second) {
            error(at(path, "id"), "duplicate task id \"" + t.task_id + "\"");
        }
        for (std::size_t i = 0; i < t.schedule.size(); ++i) {
            if (!(t.schedule[i].start < t.schedule[i].end)) {
                error(at(at(path, "schedule"), i), "window must end after it starts");
            }
        }
        std::vector<TimeWindow> windows = t.schedule;
        std::sort(windows.begin(), windows.end(),
                  [](const TimeWindow& a, const TimeWindow& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < windows.size(); ++i) {
            if (windows[i].start < windows[i - 1].end) {
                error(at(path, "schedule"), "completion windows overlap");
                break;
            }
        }
        if (t.type == TaskType::Questionnaire) {
            if (t.questions.empty()) error(at(path, "questions"), "a questionnaire needs at least one question");
            check_question_list(t.questions, at(path, "questions"));
        } else if (!t.questions.empty()) {
            error(at(path, "questions"), "checkmark tasks carry no questions");
        }
    }

    void check_interventions() {
        const std::string path = "$.details.interventionSet.interventions";
        const auto& list = d_.interventions.interventions;
        if (list.size() < 2) error(path, "at least two interventions are required");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& iv = list[i];
            const std::string p = at(path, i);
            require_text(iv.intervention_id, at(p, "id"), "intervention id");
            if (!iv.intervention_id.empty() && !ids.insert(iv.intervention_id).second) {
                error(at(p, "id"), "duplicate intervention id \"" + iv.intervention_id + "\"");
            }
            require_text(iv.name, at(p, "name"), "intervention name");
            if (iv.tasks.empty()) error(at(p, "tasks"), "an intervention needs at least one task");
            for (std::size_t k = 0; k < iv.tasks.size(); ++k) check_task(iv.tasks[k], at(at(p, "tasks"), k));
        }
    }

    void check_observations() {
        const std::string path = "$.details.observations";
        if (d_.observations.empty()) warning(path, "no observations: no study day can become countable");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < d_.observations.size(); ++i) {
            const auto& o = d_.observations[i];
            const std::string p = at(path, i);
            require_text(o.observation_id, at(p, "id"), "observation id");
            if (!o.observation_id.empty() && !ids.insert(o.observation_id).second) {
                error(at(p, "id"), "duplicate observation id \"" + o.observation_id + "\"");
            }
            if (o.task.type != TaskType::Questionnaire) {
                error(at(at(p, "task"), "type"), "observations are questionnaire tasks");
            }
            check_task(o.task, at(p, "task"));
        }
    }

    void check_slider(const Question& q, const std::string& p) {
        const SliderConfig& s = *q.slider;
        if (!(s.minimum < s.maximum)) {
            error(at(p, "maximum"), "maximum must exceed minimum");
            return;
        }
        if (!(s.step > 0)) {
            error(at(p, "step"), "step must be positive");
            return;
        }
        const double steps = (s.maximum - s.minimum) / s.step;
        if (std::fabs(steps - std::nearbyint(steps)) > kGridTolerance) {
            error(at(p, "step"), "range is not divisible by the step");
            return;
        }
        if (s.initial < s.minimum || s.initial > s.maximum) {
            error(at(p, "initial"), "initial value outside [minimum, maximum]");
        } else if (!conform_answer(q, AnswerValue{s.initial})) {
            error(at(p, "initial"), "initial value is not on the slider grid");
        }
        for (std::size_t i = 0; i < s.annotations.size(); ++i) {
            const double v = s.annotations[i].value;
            if (v < s.minimum || v > s.maximum) {
                warning(at(at(p, "annotations"), i), "annotation outside the slider range");
            }
        }
    }

    void check_question(const Question& q, const std::string& p) {
        require_text(q.question_id, at(p, "id"), "question id");
        require_text(q.prompt, at(p, "prompt"), "prompt");
        if (q.type == QuestionType::Choice) {
            if (!q.choice) {
                error(at(p, "choices"), "choice question without choices");
            } else {
                if (q.choice->choices.size() < 2) error(at(p, "choices"), "a choice question needs at least two choices");
                std::set<std::string> ids;
                for (std::size_t i = 0; i < q.choice->choices.size(); ++i) {
                    const auto& c = q.choice->choices[i];
                    if (c.choice_id.empty() || !ids.insert(c.choice_id).second) {
                        error(at(at(at(p, "choices"), i), "id"), "choice ids must be non-empty and unique");
                    }
                }
            }
        } else if (q.is_slider()) {
            if (!q.slider) error(p, "slider question without slider configuration");
            else check_slider(q, p);
        }
        if (q.default_answer && (q.type != QuestionType::Choice || q.choice) && (!q.is_slider() || q.slider)) {
            std::string why;
            if (!conform_answer(q, *q.default_answer, &why)) error(at(p, "defaultAnswer"), why);
        }
    }

    /// Questions of one questionnaire; conditionals may refer only to
    /// questions asked earlier in the same list.
    void check_question_list(const std::vector<Question>& questions, const std::string& path) {
        std::map<std::string, const Question*> earlier;
        for (std::size_t i = 0; i < questions.size(); ++i) {
            const Question& q = questions[i];
            const std::string p = at(path, i);
            check_question(q, p);
            if (q.conditional) check_expression(*q.conditional, earlier, at(p, "conditional"));
            if (!q.question_id.empty() && !earlier.emplace(q.question_id, &q).second) {
                error(at(p, "id"), "duplicate question id \"" + q.question_id + "\"");
            }
        }
    }

    void check_expression(const Expression& e, const std::map<std::string, const Question*>& table,
                          const std::string& path) {
        if (e.is_not()) {
            check_expression(e.inner(), table, at(path, "expression"));
            return;
        }
        const auto& v = e.as_value();
        auto it = table.find(v.question_id);
        if (it == table.end()) {
            error(path, "expression references unknown question \"" + v.question_id + "\"");
            return;
        }
        const Question& q = *it->second;
        const bool fits = std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, BooleanEquals>) {
                    return q.type == QuestionType::Boolean;
                } else if constexpr (std::is_same_v<T, ChoiceSelected>) {
                    if (q.type != QuestionType::Choice || !q.choice) return false;
                    const auto& cs = q.choice->choices;
                    return std::any_of(cs.begin(), cs.end(), [&](const Choice& ch) { return ch.choice_id == c.choice_id; });
                } else {
                    return q.is_slider();
                }
            },
            v.condition);
        if (!fits) error(at(path, "condition"), "condition does not match question \"" + q.question_id + "\"");
    }

    void check_criteria() {
        const std::string path = "$.details.eligibilityCriteria";
        std::map<std::string, const Question*> table;
        for (const auto& q : d_.eligibility_questions) table.emplace(q.question_id, &q);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < d_.eligibility_criteria.size(); ++i) {
            const auto& c = d_.eligibility_criteria[i];
            const std::string p = at(path, i);
            require_text(c.criterion_id, at(p, "id"), "criterion id");
            if (!c.criterion_id.empty() && !ids.insert(c.criterion_id).second) {
                error(at(p, "id"), "duplicate criterion id \"" + c.criterion_id + "\"");
            }
            require_text(c.reason, at(p, "reason"), "exclusion reason");
            check_expression(c.expression, table, at(p, "expression"));
        }
        if (for_publish_ && !d_.eligibility_criteria.empty() && d_.eligibility_questions.empty()) {
            error("$.details.eligibilityQuestions", "criteria are defined but there are no eligibility questions");
        }
    }

    void check_schedule() {
        const auto& s = d_.schedule;
        const std::string path = "$.details.schedule";
        if (s.number_of_cycles < 1) error(at(path, "numberOfCycles"), "at least one cycle is required");
        if (s.phase_duration_days < 1) error(at(path, "phaseDurationDays"), "phases last at least one day");
        if (d_.minimum_study_length_days < 1) {
            error("$.details.minimumStudyLengthDays", "minimum study length must be positive");
        } else if (s.number_of_cycles >= 1 && s.phase_duration_days >= 1 &&
                   d_.minimum_study_length_days > total_duration_days(s)) {
            error("$.details.minimumStudyLengthDays",
                  "minimum study length " + std::to_string(d_.minimum_study_length_days) +
                      " exceeds the study duration of " + std::to_string(total_duration_days(s)) + " days");
        }
    }

    void check_consent() {
        const std::string path = "$.details.consent";
        if (for_publish_ && d_.consent.empty()) error(path, "at least one consent item is required to publish");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < d_.consent.size(); ++i) {
            const auto& c = d_.consent[i];
            const std::string p = at(path, i);
            if (c.item_id.empty() || !ids.insert(c.item_id).second) error(at(p, "id"), "consent ids must be non-empty and unique");
            require_text(c.title, at(p, "title"), "consent title");
            require_text(c.text, at(p, "text"), "consent text");
        }
    }

    void check_reference(const DataReference& ref, const std::string& path) {
        const Task* task = d_.find_task(ref.task_id);
        if (task == nullptr) {
            error(at(path, "task"), "unknown task \"" + ref.task_id + "\"");
            return;
        }
        auto kind = property_kind(*task, ref.property_id);
        if (!kind) {
            error(at(path, "property"), "task \"" + ref.task_id + "\" has no reportable property \"" + ref.property_id + "\"");
        } else if (*kind != ref.kind) {
            error(at(path, "kind"), "property \"" + ref.property_id + "\" is " + std::string(to_token(*kind)));
        }
    }

    void check_reports() {
        const std::string path = "$.details.reportSpecification";
        std::set<std::string> ids;
        auto check_section = [&](const ReportSection& s, const std::string& p) {
            if (s.section_id.empty() || !ids.insert(s.section_id).second) {
                error(at(p, "id"), "section ids must be non-empty and unique");
            }
            check_reference(s.reference(), at(p, "data"));
        };
        check_section(d_.report_specification.primary, at(path, "primary"));
        for (std::size_t i = 0; i < d_.report_specification.secondary.size(); ++i) {
            check_section(d_.report_specification.secondary[i], at(at(path, "secondary"), i));
        }
    }

    void check_results() {
        const std::string path = "$.details.results";
        std::set<std::string> ids, columns;
        for (std::size_t i = 0; i < d_.results.size(); ++i) {
            const auto& r = d_.results[i];
            const std::string p = at(path, i);
            if (r.export_id.empty() || !ids.insert(r.export_id).second) error(at(p, "id"), "result ids must be non-empty and unique");
            require_text(r.column_name, at(p, "column"), "column name");
            if (!r.column_name.empty() && !columns.insert(r.column_name).second) {
                error(at(p, "column"), "duplicate column name \"" + r.column_name + "\"");
            }
            check_reference(r.reference, at(p, "data"));
        }
    }

    const StudyDetails& d_;
    const StudyMetadata& m_;
    bool for_publish_;
    std::set<std::string> task_ids_;
    ValidationReport report_;
};

} // namespace

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(),
                                                  [](const Finding& f) { return f.severity == Severity::Error; }));
}

ValidationReport validate_study(const StudyDetails& details, const StudyMetadata& metadata, bool for_publish) {
    return Validator(details, metadata, for_publish).run();
}

nlohmann::json encode_report(const ValidationReport& report) {
    nlohmann::json findings = nlohmann::json::array();
    for (const auto& f : report.findings) {
        findings.push_back({{"path", f.path},
                            {"severity", f.severity == Severity::Error ? "error" : "warning"},
                            {"message", f.message}});
    }
    return {{"errors", report.error_count()}, {"findings", std::move(findings)}};
}

std::string format_report(const ValidationReport& report) {
    std::string out;
    for (const auto& f : report.findings) {
        out += f.path;
        out += f.severity == Severity::Error ? ": error: " : ": warning: ";
        out += f.message;
        out += '\n';
    }
    return out;
}

} // namespace studyu
