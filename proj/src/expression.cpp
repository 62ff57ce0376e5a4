#include "studyu/expression.hpp"

#include <algorithm>

#include "studyu/error.hpp"

namespace studyu {

namespace {

const Question* lookup(std::span<const Question> questions, std::string_view id) {
    auto it = std::find_if(questions.begin(), questions.end(),
                           [&](const Question& q) { return q.question_id == id; });
    return it == questions.end() ? nullptr : &*it;
}

std::size_t position(std::span<const Question> questions, std::string_view id) {
    auto it = std::find_if(questions.begin(), questions.end(),
                           [&](const Question& q) { return q.question_id == id; });
    if (it == questions.end()) throw Error(ErrorCode::UnknownQuestion, "unknown question \"" + std::string(id) + "\"");
    return static_cast<std::size_t>(it - questions.begin());
}

bool compare(Comparison op, double lhs, double rhs) {
    switch (op) {
        case Comparison::Less: return lhs < rhs;
        case Comparison::LessEqual: return lhs <= rhs;
        case Comparison::Equal: return lhs == rhs;
        case Comparison::GreaterEqual: return lhs >= rhs;
        case Comparison::Greater: return lhs > rhs;
    }
    return false;
}

bool test(const Condition& condition, const AnswerValue& value, std::string_view question_id) {
    auto mismatch = [&]() -> bool {
        throw Error(ErrorCode::InvalidAnswer,
                    "answer to \"" + std::string(question_id) + "\" does not fit the condition");
    };
    if (const auto* b = std::get_if<BooleanEquals>(&condition)) {
        const bool* v = std::get_if<bool>(&value);
        return v ? *v == b->value : mismatch();
    }
    if (const auto* c = std::get_if<ChoiceSelected>(&condition)) {
        const auto* v = std::get_if<std::set<std::string>>(&value);
        return v ? v->count(c->choice_id) > 0 : mismatch();
    }
    const auto& n = std::get<NumericCompare>(condition);
    const double* v = std::get_if<double>(&value);
    return v ? compare(n.op, *v, n.value) : mismatch();
}

} // namespace

AnswerSet::AnswerSet(std::vector<Answer> answers) {
    for (auto& a : answers) add(std::move(a));
}

const Answer* AnswerSet::find(std::string_view question_id) const {
    auto it = std::find_if(answers_.begin(), answers_.end(),
                           [&](const Answer& a) { return a.question_id == question_id; });
    return it == answers_.end() ? nullptr : &*it;
}

void AnswerSet::add(Answer answer) {
    if (contains(answer.question_id)) {
        throw Error(ErrorCode::InvalidAnswer, "question \"" + answer.question_id + "\" already answered");
    }
    answers_.push_back(std::move(answer));
}

bool evaluate_expression(const Expression& expr, const AnswerSet& answers,
                         std::span<const Question> questions) {
    if (expr.is_not()) return !evaluate_expression(expr.inner(), answers, questions);
    const auto& v = expr.as_value();
    const Question* q = lookup(questions, v.question_id);
    if (q == nullptr) {
        throw Error(ErrorCode::UnknownQuestion, "expression references unknown question \"" + v.question_id + "\"");
    }
    if (const Answer* a = answers.find(v.question_id)) return test(v.condition, a->value, v.question_id);
    return test(v.condition, q->effective_default(), v.question_id);
}

NextQuestion next_question(std::span<const Question> questions, const AnswerSet& answers) {
    std::size_t last = 0;
    for (const Answer& a : answers) {
        const std::size_t pos = position(questions, a.question_id);
        if (pos < last) throw Error(ErrorCode::OutOfOrderAnswer, "answers are not in question order");
        last = pos;
    }
    std::size_t consumed = 0;
    for (const Question& q : questions) {
        const bool asked = !q.conditional || evaluate_expression(*q.conditional, answers, questions);
        const bool answered = answers.contains(q.question_id);
        if (answered) {
            if (!asked) {
                throw Error(ErrorCode::OutOfOrderAnswer,
                            "question \"" + q.question_id + "\" is skipped but was answered");
            }
            ++consumed;
            continue;
        }
        if (!asked) continue;
        if (consumed != answers.size()) {
            throw Error(ErrorCode::OutOfOrderAnswer,
                        "answers were given after unanswered question \"" + q.question_id + "\"");
        }
        return NextQuestion{&q};
    }
    return NextQuestion{};
}

AnswerSet amend_answer(std::span<const Question> questions, const AnswerSet& answers,
                       std::string_view question_id, AnswerValue new_value, Timestamp answered_at) {
    if (!answers.contains(question_id)) {
        throw Error(ErrorCode::UnknownQuestion, "question \"" + std::string(question_id) + "\" has not been answered");
    }
    const Question* q = lookup(questions, question_id);
    if (q == nullptr) throw Error(ErrorCode::UnknownQuestion, "unknown question \"" + std::string(question_id) + "\"");
    std::string why;
    auto value = conform_answer(*q, new_value, &why);
    if (!value) throw Error(ErrorCode::InvalidAnswer, q->question_id + ": " + why);

    AnswerSet out;
    for (const Answer& a : answers) {
        if (a.question_id == question_id) break;
        out.add(a);
    }
    out.add(Answer{std::string(question_id), std::move(*value), answered_at});
    return out;
}

EligibilityVerdict check_eligibility(std::span<const EligibilityCriterion> criteria,
                                     const AnswerSet& answers, std::span<const Question> questions) {
    if (!next_question(questions, answers).done()) {
        throw Error(ErrorCode::IncompleteQuestionnaire, "eligibility questionnaire is not complete");
    }
    EligibilityVerdict verdict;
    for (const auto& c : criteria) {
        if (!evaluate_expression(c.expression, answers, questions)) {
            verdict.failed_criteria.push_back({c.criterion_id, c.reason});
        }
    }
    verdict.eligible = verdict.failed_criteria.empty();
    return verdict;
}

AnswerSet conform_answers(std::span<const Question> questions, const std::vector<Answer>& raw) {
    AnswerSet out;
    for (const Answer& a : raw) {
        const Question* q = lookup(questions, a.question_id);
        if (q == nullptr) throw Error(ErrorCode::UnknownQuestion, "unknown question \"" + a.question_id + "\"");
        std::string why;
        auto value = conform_answer(*q, a.value, &why);
        if (!value) throw Error(ErrorCode::InvalidAnswer, a.question_id + ": " + why);
        out.add(Answer{a.question_id, std::move(*value), a.answered_at});
    }
    return out;
}

AnswerSet with_explicit_defaults(std::span<const Question> questions, const AnswerSet& answers) {
    AnswerSet out;
    for (const Question& q : questions) {
        if (const Answer* a = answers.find(q.question_id)) {
            out.add(*a);
        } else if (q.conditional && !evaluate_expression(*q.conditional, out, questions)) {
            out.add(Answer{q.question_id, q.effective_default(), {}});
        }
    }
    return out;
}

} // namespace studyu
