#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "studyu/study_model.hpp"

namespace studyu {

/// Answers in the order they were given; at most one per question.
class AnswerSet {
public:
    AnswerSet() = default;
    explicit AnswerSet(std::vector<Answer> answers);

    const Answer* find(std::string_view question_id) const;
    bool contains(std::string_view question_id) const { return find(question_id) != nullptr; }

    /// Appends an answer; a second answer to the same question is an
    /// InvalidAnswer error (use amend_answer to change one).
    void add(Answer answer);

    const std::vector<Answer>& answers() const { return answers_; }
    std::size_t size() const { return answers_.size(); }
    bool empty() const { return answers_.empty(); }
    auto begin() const { return answers_.begin(); }
    auto end() const { return answers_.end(); }

    friend bool operator==(const AnswerSet&, const AnswerSet&) = default;

private:
    std::vector<Answer> answers_;
};

struct FailedCriterion {
    std::string criterion_id;
    std::string reason;
    friend bool operator==(const FailedCriterion&, const FailedCriterion&) = default;
};

struct EligibilityVerdict {
    bool eligible = true;
    std::vector<FailedCriterion> failed_criteria;  // definition order
};

/// Result of stepping a questionnaire: the next question to ask, or done.
struct NextQuestion {
    const Question* question = nullptr;
    bool done() const { return question == nullptr; }
};

/// Evaluates `expr`. An unanswered question contributes its default answer.
/// Throws UnknownQuestion for a reference outside `questions`.
bool evaluate_expression(const Expression& expr, const AnswerSet& answers,
                         std::span<const Question> questions);

/// First unanswered question whose conditional holds. Questions whose
/// conditional is false are skipped and count as answered with their default.
/// Throws OutOfOrderAnswer if answers were given past the next question, to a
/// skipped question, or in an order different from the list.
NextQuestion next_question(std::span<const Question> questions, const AnswerSet& answers);

/// Replaces the answer to `question_id` and drops every answer given after it.
/// Throws UnknownQuestion if `question_id` has not been answered.
AnswerSet amend_answer(std::span<const Question> questions, const AnswerSet& answers,
                       std::string_view question_id, AnswerValue new_value, Timestamp answered_at = {});

/// Evaluates all criteria and reports every failure. Throws
/// IncompleteQuestionnaire unless next_question is done.
EligibilityVerdict check_eligibility(std::span<const EligibilityCriterion> criteria,
                                     const AnswerSet& answers, std::span<const Question> questions);

/// Type-checks raw answers against their questions and snaps numeric values
/// onto the slider grid. Throws UnknownQuestion or InvalidAnswer.
AnswerSet conform_answers(std::span<const Question> questions, const std::vector<Answer>& raw);

/// The same answers with every skipped question set explicitly to its default.
AnswerSet with_explicit_defaults(std::span<const Question> questions, const AnswerSet& answers);

} // namespace studyu
