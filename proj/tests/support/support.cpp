#include "support.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "studyu/error.hpp"
#include "studyu/expression.hpp"
#include "studyu/ols.hpp"
#include "studyu/study_json.hpp"
#include "studyu/study_validate.hpp"

using namespace studyu;

namespace testsupport {

std::string data_path(const std::string& name) { return std::string(STUDYU_TEST_DATA) + "/" + name; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Study load_fixture(const std::string& name) { return parse_study(read_text(data_path(name))); }

namespace {

int pick(SplitMix64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool coin(SplitMix64& rng) { return (rng.next() >> 63) != 0; }

const char* kWords[] = {"pain", "sleep", "mood", "Rückenschmerzen", "energy", "focus, calm", "\"quoted\"", "日本"};

std::string words(SplitMix64& rng, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += kWords[rng.next() % std::size(kWords)];
    }
    return out;
}

SliderConfig random_slider(SplitMix64& rng, bool annotated) {
    static const double kSteps[] = {1.0, 0.5, 0.25, 2.0, 5.0};
    SliderConfig s;
    s.step = kSteps[rng.next() % std::size(kSteps)];
    s.minimum = pick(rng, -5, 5);
    const int steps = pick(rng, 1, 20);
    s.maximum = s.minimum + steps * s.step;
    s.initial = s.minimum + pick(rng, 0, steps) * s.step;
    if (annotated || coin(rng)) {
        s.annotations.push_back({s.minimum, words(rng, 1)});
        s.annotations.push_back({s.maximum, words(rng, 2)});
    }
    if (coin(rng)) s.gradient = Gradient{"#00FF00", "#ff0000"};
    return s;
}

Condition random_condition(SplitMix64& rng, const Question& q) {
    switch (q.type) {
        case QuestionType::Boolean: return BooleanEquals{coin(rng)};
        case QuestionType::Choice:
            return ChoiceSelected{q.choice->choices[rng.next() % q.choice->choices.size()].choice_id};
        default: {
            const SliderConfig& s = *q.slider;
            return NumericCompare{static_cast<Comparison>(pick(rng, 0, 4)),
                                  s.grid_value(pick(rng, 0, static_cast<int>(s.grid_steps())))};
        }
    }
}

Task random_task(SplitMix64& rng, const std::string& id, bool questionnaire) {
    Task t;
    t.task_id = id;
    t.title = words(rng, 2);
    t.type = questionnaire ? TaskType::Questionnaire : TaskType::Checkmark;
    const int windows = pick(rng, 1, 3);
    for (int w = 0; w < windows; ++w) {
        const int start = (6 + 5 * w) * 60 + pick(rng, 0, 59);
        t.schedule.push_back({TimeOfDay{start}, TimeOfDay{start + pick(rng, 30, 180)}});
    }
    if (questionnaire) t.questions = random_questions(rng, id + "_q", pick(rng, 1, 4));
    return t;
}

} // namespace

std::vector<Question> random_questions(SplitMix64& rng, const std::string& prefix, int count) {
    std::vector<Question> qs;
    for (int i = 0; i < count; ++i) {
        Question q;
        q.question_id = prefix + std::to_string(i);
        q.prompt = words(rng, 3);
        if (coin(rng)) q.rationale = words(rng, 2);
        q.type = static_cast<QuestionType>(pick(rng, 0, 3));
        if (q.type == QuestionType::Choice) {
            ChoiceConfig c;
            c.multiple = coin(rng);
            const int n = pick(rng, 2, 4);
            for (int k = 0; k < n; ++k) c.choices.push_back({"c" + std::to_string(k), words(rng, 1)});
            q.choice = std::move(c);
        } else if (q.type != QuestionType::Boolean) {
            q.slider = random_slider(rng, q.type == QuestionType::AnnotatedScale);
        }
        if (i > 0 && pick(rng, 0, 3) == 0) {
            q.conditional = random_expression(rng, std::span<const Question>(qs.data(), qs.size()), pick(rng, 1, 2));
        }
        if (pick(rng, 0, 3) == 0) {
            switch (q.type) {
                case QuestionType::Boolean: q.default_answer = coin(rng); break;
                case QuestionType::Choice: q.default_answer = std::set<std::string>{q.choice->choices[0].choice_id}; break;
                default: q.default_answer = q.slider->grid_value(pick(rng, 0, static_cast<int>(q.slider->grid_steps())));
            }
        }
        qs.push_back(std::move(q));
    }
    return qs;
}

Expression random_expression(SplitMix64& rng, std::span<const Question> questions, int depth) {
    if (depth <= 1) {
        const Question& q = questions[rng.next() % questions.size()];
        return Expression::value(q.question_id, random_condition(rng, q));
    }
    return Expression::negate(random_expression(rng, questions, depth - 1));
}

Study random_study(SplitMix64& rng, int index) {
    Study s;
    StudyMetadata& m = s.metadata;
    m.study_id = "study-" + std::to_string(index);
    m.title = words(rng, 3);
    if (coin(rng)) m.description = words(rng, 6);
    if (coin(rng)) m.icon_name = "icon_" + std::to_string(pick(rng, 0, 9));
    m.contact = {words(rng, 1), words(rng, 2), coin(rng) ? "team@example.org" : "", "https://example.org"};
    m.irb = {"Board", "IRB-" + std::to_string(pick(rng, 1000, 9999))};
    m.published = coin(rng);
    m.revision = pick(rng, 0, 5);

    StudyDetails& d = s.details;
    const int n_interventions = pick(rng, 2, 4);
    for (int i = 0; i < n_interventions; ++i) {
        Intervention iv;
        iv.intervention_id = "iv" + std::to_string(i);
        iv.name = words(rng, 2);
        if (coin(rng)) iv.description = words(rng, 4);
        const int n_tasks = pick(rng, 1, 2);
        for (int t = 0; t < n_tasks; ++t) {
            iv.tasks.push_back(random_task(rng, "iv" + std::to_string(i) + "_t" + std::to_string(t), coin(rng)));
        }
        d.interventions.interventions.push_back(std::move(iv));
    }

    const int n_obs = pick(rng, 1, 2);
    for (int o = 0; o < n_obs; ++o) {
        Observation ob;
        ob.observation_id = "obs" + std::to_string(o);
        ob.title = words(rng, 2);
        ob.task = random_task(rng, "obs" + std::to_string(o) + "_t", true);
        d.observations.push_back(std::move(ob));
    }
    // A guaranteed numeric outcome for the primary section.
    Question outcome;
    outcome.question_id = "outcome";
    outcome.prompt = "How was your day?";
    outcome.type = QuestionType::VisualAnalogue;
    outcome.slider = random_slider(rng, false);
    d.observations[0].task.questions.insert(d.observations[0].task.questions.begin(), std::move(outcome));

    const int n_elig = pick(rng, 0, 3);
    d.eligibility_questions = random_questions(rng, "e", n_elig);
    if (n_elig > 0) {
        const int n_crit = pick(rng, 1, 3);
        for (int c = 0; c < n_crit; ++c) {
            d.eligibility_criteria.push_back({"crit" + std::to_string(c), words(rng, 4),
                                              random_expression(rng, d.eligibility_questions, pick(rng, 1, 3))});
        }
    }

    d.schedule.number_of_cycles = pick(rng, 1, 4);
    d.schedule.phase_duration_days = pick(rng, 1, 10);
    d.schedule.include_baseline = coin(rng);
    d.schedule.sequence = static_cast<SequenceKind>(pick(rng, 0, 2));

    const int n_consent = pick(rng, 1, 3);
    for (int c = 0; c < n_consent; ++c) {
        d.consent.push_back({"consent" + std::to_string(c), words(rng, 2), words(rng, 8), coin(rng) ? "lock" : ""});
    }

    const DataReference outcome_ref{d.observations[0].task.task_id, "outcome", ValueKind::Numeric};
    d.report_specification.primary = {"primary", words(rng, 3),
                                      LinearRegressionSection{outcome_ref, coin(rng)
                                                                               ? ImprovementDirection::HigherIsBetter
                                                                               : ImprovementDirection::LowerIsBetter}};
    const int n_secondary = pick(rng, 0, 2);
    for (int k = 0; k < n_secondary; ++k) {
        d.report_specification.secondary.push_back(
            {"secondary" + std::to_string(k), words(rng, 2),
             AverageSection{outcome_ref, static_cast<Aggregate>(pick(rng, 0, 2))}});
    }
    d.results.push_back({"r_outcome", outcome_ref, "outcome"});
    const Task& first_task = d.interventions.interventions[0].tasks[0];
    if (first_task.type == TaskType::Checkmark) {
        d.results.push_back({"r_done", {first_task.task_id, "completed", ValueKind::Boolean}, "first_task_done"});
    }

    d.minimum_study_length_days = pick(rng, 1, total_duration_days(d.schedule));
    return s;
}

Matrix invert(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw std::runtime_error("singular matrix");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double d = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    return inv;
}

OracleFit oracle_ols(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const std::size_t p = x[0].size();
    Matrix xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            xty[j] += x[i][j] * y[i];
            for (std::size_t k = 0; k < p; ++k) xtx[j][k] += x[i][j] * x[i][k];
        }
    }
    const Matrix inv = invert(xtx);
    OracleFit fit;
    fit.beta.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) fit.beta[j] += inv[j][k] * xty[k];
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < p; ++j) pred += x[i][j] * fit.beta[j];
        rss += (y[i] - pred) * (y[i] - pred);
    }
    fit.sigma2 = rss / static_cast<double>(n - p);
    fit.covariance = inv;
    for (auto& row : fit.covariance) {
        for (double& v : row) v *= fit.sigma2;
    }
    for (std::size_t j = 0; j < p; ++j) fit.se.push_back(std::sqrt(std::max(0.0, fit.covariance[j][j])));
    return fit;
}

OracleRegression oracle_regression(const std::vector<DaySample>& samples, const std::string& a, const std::string& b,
                                   bool with_baseline) {
    Matrix x;
    std::vector<double> y;
    double t_mean = 0.0;
    for (const DaySample& s : samples) {
        std::vector<double> row{1.0};
        if (with_baseline) row.push_back(s.active == a ? 1.0 : 0.0);
        row.push_back(s.active == b ? 1.0 : 0.0);
        row.push_back(s.day);
        x.push_back(row);
        y.push_back(s.value);
        t_mean += s.day;
    }
    t_mean /= static_cast<double>(samples.size());

    OracleRegression r;
    r.fit = oracle_ols(x, y);
    const std::size_t p = r.fit.beta.size();
    auto quad = [&](const std::vector<double>& c) {
        double v = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t k = 0; k < p; ++k) v += c[j] * r.fit.covariance[j][k] * c[k];
        }
        return v;
    };
    auto dot = [&](const std::vector<double>& c) {
        double v = 0.0;
        for (std::size_t j = 0; j < p; ++j) v += c[j] * r.fit.beta[j];
        return v;
    };
    std::vector<double> contrast(p, 0.0);
    if (with_baseline) {
        contrast[1] = -1.0;
        contrast[2] = 1.0;
    } else {
        contrast[1] = 1.0;
    }
    r.contrast = dot(contrast);
    r.contrast_se = std::sqrt(quad(contrast));
    r.z = r.contrast / r.contrast_se;
    r.significant = std::fabs(r.z) > 1.959964;

    std::vector<std::vector<double>> groups;
    if (with_baseline) {
        groups = {{1, 1, 0, t_mean}, {1, 0, 1, t_mean}, {1, 0, 0, t_mean}};
    } else {
        groups = {{1, 0, t_mean}, {1, 1, t_mean}};
    }
    for (const auto& g : groups) {
        const double v = dot(g);
        const double se = std::sqrt(quad(g));
        r.predicted.push_back(v);
        r.ci_low.push_back(v - 1.959964 * se);
        r.ci_high.push_back(v + 1.959964 * se);
    }
    return r;
}

} // namespace testsupport

namespace testsupport {

AnswerValue random_answer(SplitMix64& rng, const Question& q) {
    switch (q.type) {
        case QuestionType::Boolean: return coin(rng);
        case QuestionType::Choice: {
            std::set<std::string> picked;
            const auto& choices = q.choice->choices;
            if (q.choice->multiple) {
                for (const Choice& c : choices) {
                    if (coin(rng)) picked.insert(c.choice_id);
                }
            } else {
                picked.insert(choices[rng.next() % choices.size()].choice_id);
            }
            return picked;
        }
        default: return q.slider->grid_value(pick(rng, 0, static_cast<int>(q.slider->grid_steps())));
    }
}

void Tally::fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
}

Tally check_round_trip(int studies, std::uint64_t seed) {
    Tally t;
    for (const char* name : {"back_pain.json", "ibs_diets.json"}) {
        ++t.cases;
        const Study s = load_fixture(name);
        const ValidationReport r = validate_study(s.details, s.metadata, true);
        if (!r.ok()) t.fail(std::string(name) + ": " + format_report(r));
        if (!(parse_study(serialize_study(s)) == s)) t.fail(std::string(name) + ": round trip differs");
    }
    SplitMix64 rng(seed);
    for (int i = 0; i < studies; ++i) {
        ++t.cases;
        const Study s = random_study(rng, i);
        try {
            const std::string bytes = serialize_study(s);
            const Study back = parse_study(bytes);
            if (!(back == s)) t.fail("study " + std::to_string(i) + ": structural mismatch");
            else if (serialize_study(back) != bytes) t.fail("study " + std::to_string(i) + ": bytes differ");
        } catch (const Error& e) {
            t.fail("study " + std::to_string(i) + ": " + e.what());
        }
    }
    return t;
}

namespace {

struct BoolQuestionnaire {
    std::vector<Question> questions;
};

std::vector<Expression> all_bool_expressions(int question_count) {
    std::vector<Expression> out;
    for (int q = 0; q < question_count; ++q) {
        for (bool v : {true, false}) {
            const Expression leaf = Expression::value("b" + std::to_string(q), BooleanEquals{v});
            out.push_back(leaf);
            out.push_back(Expression::negate(leaf));
            out.push_back(Expression::negate(Expression::negate(leaf)));
        }
    }
    return out;
}

// Reference semantics written out directly: answers are plain bools indexed
// by question number.
bool oracle_eval(const Expression& e, const std::vector<bool>& values) {
    if (e.is_not()) return !oracle_eval(e.inner(), values);
    const auto& v = e.as_value();
    return values[std::stoi(v.question_id.substr(1))] == std::get<BooleanEquals>(v.condition).value;
}

// Conditional variants for question i > 0: none, "previous is true", "first is false".
std::vector<BoolQuestionnaire> all_bool_questionnaires(int k) {
    std::vector<BoolQuestionnaire> out;
    int variants = 1;
    for (int i = 1; i < k; ++i) variants *= 5;
    for (int code = 0; code < variants; ++code) {
        BoolQuestionnaire bq;
        int c = code;
        for (int i = 0; i < k; ++i) {
            Question q;
            q.question_id = "b" + std::to_string(i);
            q.prompt = "?";
            q.type = QuestionType::Boolean;
            if (i > 0) {
                const int v = c % 5;
                c /= 5;
                if (v > 0) {
                    q.conditional = (v <= 2) ? Expression::value("b" + std::to_string(i - 1), BooleanEquals{true})
                                             : Expression::negate(Expression::value("b0", BooleanEquals{true}));
                    if (v % 2 == 0) q.default_answer = true;
                }
            }
            bq.questions.push_back(std::move(q));
        }
        out.push_back(std::move(bq));
    }
    return out;
}

} // namespace

Tally check_expression_truth_tables() {
    Tally t;
    for (int k = 1; k <= 3; ++k) {
        const std::vector<Expression> exprs = all_bool_expressions(k);
        std::vector<std::vector<EligibilityCriterion>> lists{{}};
        for (std::size_t i = 0; i < exprs.size(); ++i) {
            lists.push_back({{"c0", "r0", exprs[i]}});
            for (std::size_t j = 0; j < exprs.size(); ++j) lists.push_back({{"c0", "r0", exprs[i]}, {"c1", "r1", exprs[j]}});
        }
        for (const BoolQuestionnaire& bq : all_bool_questionnaires(k)) {
            for (int combo = 0; combo < (1 << k); ++combo) {
                // Walk the flow with the engine and, separately, resolve the
                // effective values by hand.
                AnswerSet answers;
                for (NextQuestion n = next_question(bq.questions, answers); !n.done();
                     n = next_question(bq.questions, answers)) {
                    const int idx = std::stoi(n.question->question_id.substr(1));
                    answers.add({n.question->question_id, static_cast<bool>((combo >> idx) & 1), {}});
                }
                std::vector<bool> values(k);
                for (int i = 0; i < k; ++i) {
                    const Question& q = bq.questions[i];
                    const bool asked = !q.conditional || oracle_eval(*q.conditional, values);
                    values[i] = asked ? static_cast<bool>((combo >> i) & 1)
                                      : (q.default_answer ? std::get<bool>(*q.default_answer) : false);
                }
                for (const auto& criteria : lists) {
                    ++t.cases;
                    const EligibilityVerdict v = check_eligibility(criteria, answers, bq.questions);
                    std::vector<std::string> expected;
                    for (const auto& c : criteria) {
                        if (!oracle_eval(c.expression, values)) expected.push_back(c.criterion_id);
                    }
                    std::vector<std::string> got;
                    for (const auto& f : v.failed_criteria) got.push_back(f.criterion_id);
                    if (got != expected || v.eligible != expected.empty()) {
                        t.fail("k=" + std::to_string(k) + " combo=" + std::to_string(combo) + " criteria=" +
                               std::to_string(criteria.size()));
                    }
                }
            }
        }
    }
    return t;
}

Tally check_schedule_balance(int pairs, std::uint64_t seed) {
    Tally t;
    SplitMix64 rng(seed);
    for (int i = 0; i < pairs; ++i) {
        ++t.cases;
        StudySchedule s;
        s.number_of_cycles = pick(rng, 1, 12);
        s.phase_duration_days = pick(rng, 1, 21);
        s.include_baseline = coin(rng);
        s.sequence = static_cast<SequenceKind>(i % 3);
        const std::string a = "x" + std::to_string(pick(rng, 0, 9));
        const std::string b = "y" + std::to_string(pick(rng, 0, 9));
        const std::uint64_t sd = rng.next();
        const PhaseSequence seq = generate_phase_sequence(s, a, b, sd);
        const std::string tag = "pair " + std::to_string(i);

        int count_a = 0, count_b = 0, baselines = 0, next_start = 1;
        for (std::size_t p = 0; p < seq.phases.size(); ++p) {
            const Phase& ph = seq.phases[p];
            if (ph.start_day != next_start || ph.length_days != s.phase_duration_days ||
                ph.phase_index != static_cast<int>(p)) {
                t.fail(tag + ": phases not contiguous");
            }
            next_start = ph.start_day + ph.length_days;
            if (ph.is_baseline()) {
                ++baselines;
                if (p != 0) t.fail(tag + ": baseline not first");
            } else if (*ph.intervention_id == a) {
                ++count_a;
            } else if (*ph.intervention_id == b) {
                ++count_b;
            } else {
                t.fail(tag + ": foreign intervention");
            }
        }
        const int expected_total = s.phase_duration_days * (2 * s.number_of_cycles + (s.include_baseline ? 1 : 0));
        if (count_a != s.number_of_cycles || count_b != s.number_of_cycles) t.fail(tag + ": unbalanced");
        if (baselines != (s.include_baseline ? 1 : 0)) t.fail(tag + ": baseline count");
        if (seq.total_days != expected_total || total_duration_days(s) != expected_total ||
            next_start != expected_total + 1) {
            t.fail(tag + ": total duration");
        }
        if (!(generate_phase_sequence(s, a, b, sd) == seq)) t.fail(tag + ": not reproducible");
    }
    return t;
}

Tally check_ols_parity(int designs, std::uint64_t seed) {
    Tally t;
    SplitMix64 rng(seed);
    auto rel = [](double got, double want) { return std::fabs(got - want) <= 1e-9 * std::max(std::fabs(want), 1e-300); };
    while (t.cases < designs) {
        const int p = pick(rng, 1, 4);
        const int n = pick(rng, p + 1, 50);
        Matrix x(n, std::vector<double>(p));
        std::vector<double> beta(p);
        for (int j = 0; j < p; ++j) beta[j] = (0.5 + 2.5 * rng.next_unit()) * (coin(rng) ? 1 : -1);
        // Column kinds: intercept, 0/1 dummy, study-day trend, uniform covariate.
        std::vector<int> kind(p);
        for (int j = 0; j < p; ++j) kind[j] = j == 0 ? 0 : pick(rng, 1, 3);
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) {
                switch (kind[j]) {
                    case 0: x[i][j] = 1.0; break;
                    case 1: x[i][j] = coin(rng) ? 1.0 : 0.0; break;
                    case 2: x[i][j] = i + 1; break;
                    default: x[i][j] = -3.0 + 6.0 * rng.next_unit();
                }
            }
            double mean = 0.0;
            for (int j = 0; j < p; ++j) mean += x[i][j] * beta[j];
            y[i] = mean + 0.5 * (rng.next_unit() - 0.5);
        }
        Eigen::MatrixXd xe(n, p);
        Eigen::VectorXd ye(n);
        for (int i = 0; i < n; ++i) {
            ye(i) = y[i];
            for (int j = 0; j < p; ++j) xe(i, j) = x[i][j];
        }
        // The oracle squares the condition number; keep it within reach of 1e-9.
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(xe);
        const auto sv = svd.singularValues();
        if (sv(p - 1) <= 0.0 || sv(0) / sv(p - 1) > 1e3) continue;

        ++t.cases;
        const std::string tag = "design " + std::to_string(t.cases) + " (n=" + std::to_string(n) +
                                ", p=" + std::to_string(p) + ")";
        const RegressionFit fit = fit_linear_model(xe, ye);
        const OracleFit oracle = oracle_ols(x, y);
        for (int j = 0; j < p; ++j) {
            if (!rel(fit.coefficients(j), oracle.beta[j])) t.fail(tag + ": coefficient " + std::to_string(j));
            if (!rel(fit.standard_errors(j), oracle.se[j])) t.fail(tag + ": standard error " + std::to_string(j));
        }
        if (!rel(fit.residual_variance, oracle.sigma2)) t.fail(tag + ": residual variance");
        const Eigen::VectorXd normal = xe.transpose() * (ye - xe * fit.coefficients);
        if (normal.cwiseAbs().maxCoeff() > 1e-8) t.fail(tag + ": normal equations");
    }
    return t;
}

} // namespace testsupport

namespace testsupport {

Timestamp synthetic_noon(int day) {
    return Timestamp{parse_date("2024-01-01").value() + std::chrono::days{day - 1}} + std::chrono::hours{12};
}

Enrollment synthetic_enrollment(Study study, const StudySchedule& schedule, const std::string& a, const std::string& b,
                                const std::string& question, const std::vector<std::optional<double>>& values) {
    study.details.schedule = schedule;
    study.details.minimum_study_length_days = std::min(study.details.minimum_study_length_days,
                                                       total_duration_days(schedule));
    Enrollment e;
    e.enrollment_id = "enrollment-1";
    e.user_id = "user-1";
    e.study_id = study.metadata.study_id;
    e.selections = {a, b};
    e.phase_sequence = generate_phase_sequence(schedule, a, b, 0);
    e.started_on = parse_date("2024-01-01").value();
    e.consent_given_at = Timestamp{e.started_on};
    const std::string observation = study.details.observations.at(0).task.task_id;
    e.snapshot = std::make_shared<const Study>(std::move(study));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) continue;
        const int day = static_cast<int>(i) + 1;
        for (const PlannedTask& t : day_plan(e.phase_sequence, e.details(), day).tasks) {
            TaskResult r;
            r.result_id = "r" + std::to_string(day) + "-" + t.task_id;
            r.task_id = t.task_id;
            r.study_day = day;
            r.completed_at = synthetic_noon(day);
            if (t.task_id == observation) {
                r.payload = AnswerSet({{question, *values[i], r.completed_at}});
            } else if (e.details().find_task(t.task_id)->type == TaskType::Checkmark) {
                r.payload = CheckmarkCompleted{};
            } else {
                continue;
            }
            e.results.push_back(std::move(r));
        }
    }
    return e;
}

} // namespace testsupport
