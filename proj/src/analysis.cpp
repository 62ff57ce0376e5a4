#include "studyu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace studyu {

using nlohmann::json;

namespace {

constexpr const char* kBaselineLabel = "baseline";

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string intervention_name(const Enrollment& e, const std::string& id) {
    const Intervention* iv = e.details().find_intervention(id);
    return iv ? iv->name : id;
}

std::string phase_label(const Phase& p) {
    return "phase " + std::to_string(p.phase_index + 1) + " (" +
           (p.intervention_id ? *p.intervention_id : std::string(kBaselineLabel)) + ")";
}

std::string narrative_for(const Enrollment& e, const RegressionResult& r, ImprovementDirection improvement) {
    const std::string a = intervention_name(e, e.phase_sequence.intervention_a);
    const std::string b = intervention_name(e, e.phase_sequence.intervention_b);
    const double lo = r.contrast - kWaldCritical95 * r.contrast_standard_error;
    const double hi = r.contrast + kWaldCritical95 * r.contrast_standard_error;
    std::string text = "Compared with " + a + ", the outcome with " + b + " differed by " + fixed2(r.contrast) +
                       " on average (95% CI " + fixed2(lo) + " to " + fixed2(hi) + "), correcting for a linear trend. ";
    if (!r.decision.assessable) {
        return text + "Your data vary too little to tell whether this difference is statistically significant.";
    }
    if (!r.decision.significant) {
        return text + "This difference is not statistically significant at the 0.05 level, so neither " +
               "intervention can be said to improve the outcome.";
    }
    const std::string winner = intervention_name(e, *r.favored_intervention);
    return text + "This difference is statistically significant at the 0.05 level: " + winner +
           " improved the outcome (" +
           (improvement == ImprovementDirection::HigherIsBetter ? "higher" : "lower") + " is better).";
}

} // namespace

TimeSeries resolve_data_reference(const DataReference& ref, const Enrollment& enrollment) {
    const Task* task = enrollment.details().find_task(ref.task_id);
    if (task == nullptr) throw Error(ErrorCode::UnknownProperty, "unknown task \"" + ref.task_id + "\"");
    auto kind = property_kind(*task, ref.property_id);
    if (!kind) {
        throw Error(ErrorCode::UnknownProperty,
                    "task \"" + ref.task_id + "\" has no reportable property \"" + ref.property_id + "\"");
    }
    if (*kind != ref.kind) {
        throw Error(ErrorCode::TypeMismatch, "property \"" + ref.property_id + "\" is " +
                                                 std::string(kind == ValueKind::Numeric ? "numeric" : "boolean"));
    }
    TimeSeries series;
    series.source = ref;
    for (const TaskResult& r : enrollment.results) {
        if (r.task_id != ref.task_id) continue;
        if (std::holds_alternative<CheckmarkCompleted>(r.payload)) {
            series.points.push_back({r.study_day, r.completed_at, 1.0});
            continue;
        }
        const Answer* a = std::get<AnswerSet>(r.payload).find(ref.property_id);
        if (a == nullptr) continue;
        if (const bool* b = std::get_if<bool>(&a->value)) {
            series.points.push_back({r.study_day, r.completed_at, *b ? 1.0 : 0.0});
        } else if (const double* d = std::get_if<double>(&a->value)) {
            series.points.push_back({r.study_day, r.completed_at, *d});
        }
    }
    std::stable_sort(series.points.begin(), series.points.end(),
                     [](const SeriesPoint& x, const SeriesPoint& y) { return x.study_day < y.study_day; });
    return series;
}

AverageBars average_section(const TimeSeries& series, Aggregate aggregate, const PhaseSequence& sequence) {
    if (series.points.empty()) throw Error(ErrorCode::EmptySeries, "no data for this section yet");

    std::vector<std::string> labels;
    std::vector<double> sums;
    std::vector<int> counts;
    auto group_of = [&](int day) -> std::size_t {
        const Phase& p = sequence.phase_for_day(day);
        switch (aggregate) {
            case Aggregate::Day: return static_cast<std::size_t>(day - 1);
            case Aggregate::Phase: return static_cast<std::size_t>(p.phase_index);
            case Aggregate::Intervention:
                if (!p.intervention_id) return 2;
                return *p.intervention_id == sequence.intervention_a ? 0 : 1;
        }
        return 0;
    };
    switch (aggregate) {
        case Aggregate::Day:
            for (int d = 1; d <= sequence.total_days; ++d) labels.push_back("day " + std::to_string(d));
            break;
        case Aggregate::Phase:
            for (const Phase& p : sequence.phases) labels.push_back(phase_label(p));
            break;
        case Aggregate::Intervention:
            labels = {sequence.intervention_a, sequence.intervention_b};
            if (!sequence.phases.empty() && sequence.phases.front().is_baseline()) labels.emplace_back(kBaselineLabel);
            break;
    }
    sums.assign(labels.size(), 0.0);
    counts.assign(labels.size(), 0);
    for (const SeriesPoint& pt : series.points) {
        const std::size_t g = group_of(pt.study_day);
        sums[g] += pt.value;
        ++counts[g];
    }
    AverageBars out;
    for (std::size_t g = 0; g < labels.size(); ++g) {
        AverageBar bar{labels[g], std::nullopt, counts[g]};
        if (counts[g] > 0) bar.mean = sums[g] / counts[g];
        out.bars.push_back(std::move(bar));
    }
    return out;
}

RegressionResult build_regression_section(const Enrollment& enrollment, const LinearRegressionSection& section,
                                          const PhaseSequence& sequence, const std::set<int>& countable) {
    const TimeSeries series = resolve_data_reference(section.reference, enrollment);

    std::map<int, std::pair<double, int>> per_day;
    for (const SeriesPoint& pt : series.points) {
        if (!countable.count(pt.study_day)) continue;
        auto& [sum, count] = per_day[pt.study_day];
        sum += pt.value;
        ++count;
    }

    const bool with_baseline = !sequence.phases.empty() && sequence.phases.front().is_baseline();
    const int p = with_baseline ? 4 : 3;
    const int n = static_cast<int>(per_day.size());
    if (n <= p) {
        throw Error(ErrorCode::InsufficientData, "only " + std::to_string(n) + " countable days with data; at least " +
                                                     std::to_string(p + 1) + " are needed");
    }

    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    int row = 0;
    double t_sum = 0.0;
    for (const auto& [day, acc] : per_day) {
        const Phase& phase = sequence.phase_for_day(day);
        const bool is_a = phase.intervention_id && *phase.intervention_id == sequence.intervention_a;
        const bool is_b = phase.intervention_id && *phase.intervention_id == sequence.intervention_b;
        int c = 0;
        x(row, c++) = 1.0;
        if (with_baseline) x(row, c++) = is_a ? 1.0 : 0.0;
        x(row, c++) = is_b ? 1.0 : 0.0;
        x(row, c++) = static_cast<double>(day);
        y(row) = acc.first / acc.second;
        t_sum += day;
        ++row;
    }
    std::vector<std::string> labels{"intercept"};
    if (with_baseline) labels.push_back("D_" + sequence.intervention_a);
    labels.push_back("D_" + sequence.intervention_b);
    labels.emplace_back("trend");

    RegressionResult result;
    result.fit = fit_linear_model(x, y, std::move(labels));
    result.mean_trend = t_sum / n;

    Eigen::VectorXd contrast = Eigen::VectorXd::Zero(p);
    if (with_baseline) {
        contrast(1) = -1.0;
        contrast(2) = 1.0;
    } else {
        contrast(1) = 1.0;
    }
    result.contrast = contrast.dot(result.fit.coefficients);
    result.contrast_standard_error =
        std::sqrt(std::max(0.0, contrast.dot(result.fit.covariance * contrast)));
    result.decision = wald_test(result.contrast, result.contrast_standard_error, result.fit.residual_variance);

    auto predict = [&](const std::string& group, bool a, bool b) {
        Eigen::VectorXd at = Eigen::VectorXd::Zero(p);
        int c = 0;
        at(c++) = 1.0;
        if (with_baseline) at(c++) = a ? 1.0 : 0.0;
        at(c++) = b ? 1.0 : 0.0;
        at(c++) = result.mean_trend;
        PredictedValue pv;
        pv.group = group;
        pv.value = at.dot(result.fit.coefficients);
        pv.standard_error = std::sqrt(std::max(0.0, at.dot(result.fit.covariance * at)));
        pv.ci_low = pv.value - kWaldCritical95 * pv.standard_error;
        pv.ci_high = pv.value + kWaldCritical95 * pv.standard_error;
        result.predicted.push_back(pv);
    };
    predict(sequence.intervention_a, true, false);
    predict(sequence.intervention_b, false, true);
    if (with_baseline) predict(kBaselineLabel, false, false);

    if (result.decision.significant) {
        const bool b_higher = result.contrast > 0.0;
        const bool b_better = (section.improvement == ImprovementDirection::HigherIsBetter) == b_higher;
        result.favored_intervention = b_better ? sequence.intervention_b : sequence.intervention_a;
    }
    result.narrative = narrative_for(enrollment, result, section.improvement);
    return result;
}

ReportBundle build_report(const Enrollment& enrollment, Timestamp now, bool demo_unlock) {
    const StudyDetails& details = enrollment.details();
    const PhaseSequence& seq = enrollment.phase_sequence;
    const int today = enrollment.study_day_at(now);

    ReportBundle bundle;
    bundle.generated_at = now;
    const CompletionSet completions = enrollment.completions();
    bundle.progress = progress(seq, details, completions, today);
    bundle.locked = !(bundle.progress.power_reached || demo_unlock);
    if (bundle.locked) return bundle;

    CompletionSet to_date;
    for (const auto& c : completions) {
        if (c.first <= bundle.progress.days_elapsed) to_date.insert(c);
    }
    const std::set<int> countable = countable_days(seq, details, to_date);

    auto compute = [&](const ReportSection& section, bool primary) {
        SectionOutcome out{section.section_id, section.title, primary, SectionError{}};
        try {
            if (const auto* avg = std::get_if<AverageSection>(&section.body)) {
                TimeSeries series = resolve_data_reference(avg->reference, enrollment);
                std::erase_if(series.points, [&](const SeriesPoint& p) { return p.study_day > bundle.progress.days_elapsed; });
                out.payload = average_section(series, avg->aggregate, seq);
            } else {
                out.payload = build_regression_section(enrollment, std::get<LinearRegressionSection>(section.body), seq,
                                                       countable);
            }
        } catch (const Error& e) {
            out.payload = SectionError{e.code(), e.what()};
        }
        bundle.sections.push_back(std::move(out));
    };
    compute(details.report_specification.primary, true);
    for (const auto& s : details.report_specification.secondary) compute(s, false);
    return bundle;
}

json encode_progress(const ProgressSummary& p) {
    json phases = json::array();
    for (const auto& ph : p.per_phase) {
        phases.push_back({{"phaseIndex", ph.phase_index}, {"completedDays", ph.completed_days}, {"lengthDays", ph.length_days}});
    }
    json tasks = json::array();
    for (const auto& t : p.per_task_counts) {
        tasks.push_back({{"task", t.task_id}, {"completed", t.completed}, {"scheduledToDate", t.scheduled_to_date}});
    }
    return {{"daysElapsed", p.days_elapsed},
            {"countableDays", p.countable_days},
            {"requiredDays", p.required_days},
            {"powerReached", p.power_reached},
            {"perPhase", std::move(phases)},
            {"perTask", std::move(tasks)}};
}

namespace {

json encode_vector(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json encode_section(const SectionOutcome& s) {
    json j{{"id", s.section_id}, {"title", s.title}, {"primary", s.primary}};
    if (const auto* bars = std::get_if<AverageBars>(&s.payload)) {
        json list = json::array();
        for (const auto& b : bars->bars) {
            list.push_back({{"label", b.label}, {"mean", b.mean ? json(*b.mean) : json(nullptr)}, {"count", b.count}});
        }
        j["type"] = "average";
        j["bars"] = std::move(list);
    } else if (const auto* r = std::get_if<RegressionResult>(&s.payload)) {
        json predicted = json::array();
        for (const auto& pv : r->predicted) {
            predicted.push_back({{"group", pv.group},
                                 {"value", pv.value},
                                 {"standardError", pv.standard_error},
                                 {"ciLow", pv.ci_low},
                                 {"ciHigh", pv.ci_high}});
        }
        j["type"] = "linearRegression";
        j["predicted"] = std::move(predicted);
        j["fit"] = {{"labels", r->fit.design_labels},
                    {"coefficients", encode_vector(r->fit.coefficients)},
                    {"standardErrors", encode_vector(r->fit.standard_errors)},
                    {"residualVariance", r->fit.residual_variance},
                    {"n", r->fit.n},
                    {"p", r->fit.p}};
        j["contrast"] = r->contrast;
        j["contrastStandardError"] = r->contrast_standard_error;
        j["meanTrend"] = r->mean_trend;
        j["decision"] = {{"z", r->decision.z ? json(*r->decision.z) : json(nullptr)},
                         {"alpha", r->decision.alpha},
                         {"assessable", r->decision.assessable},
                         {"significant", r->decision.significant},
                         {"favored", r->favored_intervention ? json(*r->favored_intervention) : json(nullptr)}};
        j["narrative"] = r->narrative;
    } else {
        const auto& e = std::get<SectionError>(s.payload);
        j["type"] = "error";
        j["code"] = std::string(error_name(e.code));
        j["message"] = e.message;
    }
    return j;
}

} // namespace

json encode_report_bundle(const ReportBundle& bundle) {
    json sections = json::array();
    for (const auto& s : bundle.sections) sections.push_back(encode_section(s));
    return {{"generatedAt", format_timestamp(bundle.generated_at)},
            {"locked", bundle.locked},
            {"progress", encode_progress(bundle.progress)},
            {"sections", std::move(sections)}};
}

} // namespace studyu
