#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "studyu/enrollment.hpp"
#include "studyu/error.hpp"
#include "studyu/schedule.hpp"
#include "studyu/study_model.hpp"

namespace testsupport {

std::string data_path(const std::string& name);
std::string read_text(const std::string& path);
studyu::Study load_fixture(const std::string& name);

template <class F>
studyu::Error capture_error(F&& f) {
    try {
        f();
    } catch (const studyu::Error& e) {
        return e;
    }
    throw std::runtime_error("expected studyu::Error, nothing was thrown");
}

/// A random study that passes validate_study with the publish gate.
studyu::Study random_study(studyu::SplitMix64& rng, int index);

/// Random question list; conditionals only look backwards.
std::vector<studyu::Question> random_questions(studyu::SplitMix64& rng, const std::string& prefix, int count);

/// Random expression of the given depth over `questions`, with conditions
/// that fit the referenced question.
studyu::Expression random_expression(studyu::SplitMix64& rng, std::span<const studyu::Question> questions, int depth);

/// Enrollment in `study` (schedule replaced by `schedule`) comparing a and b,
/// starting 2024-01-01 at UTC. For each day with a value every scheduled
/// intervention task is completed and the first observation is answered with
/// `question` = value.
studyu::Enrollment synthetic_enrollment(studyu::Study study, const studyu::StudySchedule& schedule,
                                        const std::string& a, const std::string& b, const std::string& question,
                                        const std::vector<std::optional<double>>& values);

/// Noon on study day `day` of an enrollment made by synthetic_enrollment.
studyu::Timestamp synthetic_noon(int day);

/// A random answer that conforms to `question`.
studyu::AnswerValue random_answer(studyu::SplitMix64& rng, const studyu::Question& question);

struct Tally {
    long cases = 0;
    long failures = 0;
    std::string first_failure;
    void fail(const std::string& what);
    bool ok() const { return cases > 0 && failures == 0; }
};

/// parse(serialize(S)) == S over random valid studies, plus both fixtures
/// passing the publish gate.
Tally check_round_trip(int studies, std::uint64_t seed);

/// check_eligibility against an independent evaluator over every boolean
/// questionnaire of up to three questions, every expression of depth up to
/// three, and every list of up to two criteria.
Tally check_expression_truth_tables();

/// Balance, contiguity and duration over random (schedule, seed) pairs.
Tally check_schedule_balance(int pairs, std::uint64_t seed);

/// Production solver against oracle_ols on random full-rank designs.
Tally check_ols_parity(int designs, std::uint64_t seed);

// Independent least-squares oracle: forms X'X explicitly and inverts it by
// Gauss-Jordan elimination with partial pivoting.
using Matrix = std::vector<std::vector<double>>;

struct OracleFit {
    std::vector<double> beta;
    std::vector<double> se;
    Matrix covariance;
    double sigma2 = 0.0;
};

Matrix invert(Matrix a);
OracleFit oracle_ols(const Matrix& x, const std::vector<double>& y);

/// Oracle for the participant regression: builds its own design from
/// (day, value, active intervention or "" for baseline) samples.
struct OracleRegression {
    OracleFit fit;
    double contrast = 0.0;
    double contrast_se = 0.0;
    double z = 0.0;
    bool significant = false;
    std::vector<double> predicted;  // A, B[, baseline]
    std::vector<double> ci_low;
    std::vector<double> ci_high;
};

struct DaySample {
    int day;
    double value;
    std::string active;  // empty during baseline
};

OracleRegression oracle_regression(const std::vector<DaySample>& samples, const std::string& a, const std::string& b,
                                   bool with_baseline);

} // namespace testsupport
