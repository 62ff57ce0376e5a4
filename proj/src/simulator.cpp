#include "studyu/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "studyu/error.hpp"
#include "studyu/study_json.hpp"

namespace studyu {

using nlohmann::json;

namespace {

json encode_payload(const ResultPayload& payload) {
    if (std::holds_alternative<CheckmarkCompleted>(payload)) return {{"type", "completed"}};
    json answers = json::array();
    for (const Answer& a : std::get<AnswerSet>(payload)) answers.push_back(encode_answer(a));
    return {{"type", "answers"}, {"answers", std::move(answers)}};
}

double standard_normal(SplitMix64& rng) {
    const double u1 = 1.0 - rng.next_unit();  // (0, 1]
    const double u2 = rng.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double snap_to_slider(const SliderConfig& s, double value) {
    const long long steps = s.grid_steps();
    double k = std::round((value - s.minimum) / s.step);
    k = std::clamp(k, 0.0, static_cast<double>(steps));
    return s.grid_value(static_cast<long long>(k));
}

AnswerValue random_value(const Question& q, SplitMix64& rng) {
    switch (q.type) {
        case QuestionType::Boolean:
            return (rng.next() >> 63) != 0;
        case QuestionType::Choice: {
            const auto& choices = q.choice->choices;
            std::set<std::string> picked;
            if (q.choice->multiple) {
                for (const Choice& c : choices) {
                    if (rng.next() >> 63) picked.insert(c.choice_id);
                }
            } else {
                picked.insert(choices[rng.next() % choices.size()].choice_id);
            }
            return picked;
        }
        case QuestionType::VisualAnalogue:
        case QuestionType::AnnotatedScale: {
            const long long steps = q.slider->grid_steps();
            return q.slider->grid_value(static_cast<long long>(rng.next() % static_cast<std::uint64_t>(steps + 1)));
        }
    }
    return false;
}

template <class ValueFor>
AnswerSet answer_questionnaire(std::span<const Question> questions, Timestamp now, ValueFor value_for) {
    AnswerSet answers;
    for (NextQuestion next = next_question(questions, answers); !next.done();
         next = next_question(questions, answers)) {
        answers.add(Answer{next.question->question_id, value_for(*next.question), now});
    }
    return answers;
}

SimulationSummary tally(std::vector<ParticipantOutcome> outcomes) {
    SimulationSummary s;
    for (const auto& p : outcomes) {
        if (p.error_code) ++s.errors;
        if (p.assessable) ++s.assessable;
        if (p.significant) ++s.significant;
    }
    s.participants = std::move(outcomes);
    return s;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

ParticipantOutcome simulate_participant(SimTransport& transport, const SimulationParams& params, int index,
                                        std::uint64_t participant_seed) {
    ParticipantOutcome out;
    out.index = index;
    SplitMix64 rng(participant_seed);
    const Study& study = transport.study();
    const StudyDetails& details = study.details;
    const DataReference& outcome_ref = details.report_specification.primary.reference();

    const Task* outcome_task = details.find_task(outcome_ref.task_id);
    const Question* outcome_question = outcome_task ? outcome_task->find_question(outcome_ref.property_id) : nullptr;
    if (outcome_question != nullptr && !outcome_question->slider) outcome_question = nullptr;
    double baseline = 0.0;
    if (outcome_question != nullptr) {
        const SliderConfig& s = *outcome_question->slider;
        baseline = params.baseline_level.value_or(s.grid_value(s.grid_steps() / 2));
    }

    try {
        transport.set_time(params.start);
        const std::string user = transport.create_user();

        EnrollRequest req;
        req.user_id = user;
        req.study_id = study.metadata.study_id;
        const auto& interventions = details.interventions.interventions;
        const std::size_t n = interventions.size();
        std::size_t first = static_cast<std::size_t>(rng.next() % n);
        std::size_t second = static_cast<std::size_t>(rng.next() % (n - 1));
        if (second >= first) ++second;
        req.selections = {interventions[first].intervention_id, interventions[second].intervention_id};
        req.consent = true;
        req.seed = rng.next();

        constexpr int kMaxEligibilityTries = 1000;
        bool eligible = false;
        for (int attempt = 0; attempt < kMaxEligibilityTries && !eligible; ++attempt) {
            AnswerSet answers = answer_questionnaire(details.eligibility_questions, params.start,
                                                     [&](const Question& q) { return random_value(q, rng); });
            if (check_eligibility(details.eligibility_criteria, answers, details.eligibility_questions).eligible) {
                req.eligibility_answers = answers.answers();
                eligible = true;
            }
        }
        if (!eligible) throw Error(ErrorCode::NotEligible, "no eligible answers found");

        const json header = transport.enroll(req);
        const std::string eid = header.at("id").get<std::string>();
        const PhaseSequence seq = decode_phase_sequence(header.at("phaseSequence"));

        for (int day = 1; day <= seq.total_days; ++day) {
            const Timestamp now = params.start + std::chrono::days{day - 1} + std::chrono::hours{12};
            transport.set_time(now);
            const DayPlan plan = day_plan(seq, details, day);
            const bool b_active = plan.active_intervention && *plan.active_intervention == seq.intervention_b;
            for (const PlannedTask& planned : plan.tasks) {
                if (!(rng.next_unit() < params.adherence)) continue;
                const Task& task = *details.find_task(planned.task_id);
                SubmitResult result;
                result.task_id = task.task_id;
                result.study_day = day;
                if (task.type == TaskType::Checkmark) {
                    result.payload = CheckmarkCompleted{};
                } else {
                    result.payload = answer_questionnaire(task.questions, now, [&](const Question& q) -> AnswerValue {
                        if (&q == outcome_question) {
                            const double level = baseline + (b_active ? params.effect : 0.0) + params.trend * day +
                                                 params.noise_sd * standard_normal(rng);
                            return snap_to_slider(*q.slider, level);
                        }
                        return random_value(q, rng);
                    });
                }
                transport.submit(eid, result);
            }
        }

        transport.set_time(params.start + std::chrono::days{seq.total_days - 1} + std::chrono::hours{23});
        const json report = transport.report(eid);
        if (report.at("locked").get<bool>()) {
            out.error_code = "report_locked";
            out.error_message = "minimum study length not reached";
            return out;
        }
        const json* primary = nullptr;
        for (const json& s : report.at("sections")) {
            if (s.at("primary").get<bool>()) primary = &s;
        }
        if (primary == nullptr || primary->at("type") == "average") {
            out.error_code = "no_regression";
            out.error_message = "the primary section is not a regression";
        } else if (primary->at("type") == "error") {
            out.error_code = primary->at("code").get<std::string>();
            out.error_message = primary->at("message").get<std::string>();
        } else {
            const json& d = primary->at("decision");
            out.assessable = d.at("assessable").get<bool>();
            out.significant = d.at("significant").get<bool>();
            if (!d.at("z").is_null()) out.z = d.at("z").get<double>();
            if (!d.at("favored").is_null()) out.favored = d.at("favored").get<std::string>();
            out.contrast = primary->at("contrast").get<double>();
        }
    } catch (const Error& e) {
        out.error_code = std::string(error_name(e.code()));
        out.error_message = e.what();
    }
    return out;
}

} // namespace

void check_params(const SimulationParams& p) {
    if (p.participants < 0) throw Error(ErrorCode::BadRequest, "participants must be non-negative");
    for (double v : {p.effect, p.noise_sd, p.adherence, p.trend, p.baseline_level.value_or(0.0)}) {
        if (!std::isfinite(v)) throw Error(ErrorCode::BadRequest, "simulation parameters must be finite");
    }
    if (p.noise_sd < 0.0) throw Error(ErrorCode::BadRequest, "noise-sd must be non-negative");
    if (p.adherence < 0.0 || p.adherence > 1.0) throw Error(ErrorCode::BadRequest, "adherence must lie in [0, 1]");
}

double SimulationSummary::significant_fraction() const {
    return participants.empty() ? 0.0 : static_cast<double>(significant) / static_cast<double>(participants.size());
}

SimulationSummary run_simulation(SimTransport& transport, const SimulationParams& params) {
    check_params(params);
    if (transport.study().details.interventions.interventions.size() < 2) {
        throw Error(ErrorCode::TooFewInterventions, "the study needs at least two interventions");
    }
    SplitMix64 master(params.seed);
    std::vector<ParticipantOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(params.participants));
    for (int i = 1; i <= params.participants; ++i) {
        outcomes.push_back(simulate_participant(transport, params, i, master.next()));
    }
    return tally(std::move(outcomes));
}

std::string format_summary(const SimulationSummary& s) {
    std::string out;
    for (const auto& p : s.participants) {
        out += "participant " + std::to_string(p.index) + ": ";
        if (p.error_code) {
            out += "error " + *p.error_code;
        } else if (!p.assessable) {
            out += "not assessable";
        } else {
            out += p.significant ? "significant" : "not significant";
            out += " (z = " + fixed(*p.z, 4);
            if (p.favored) out += ", favors " + *p.favored;
            out += ")";
        }
        out += "\n";
    }
    out += "significant fraction: " + std::to_string(s.significant) + "/" + std::to_string(s.participants.size()) +
           " = " + fixed(s.significant_fraction(), 4) + " (assessable " + std::to_string(s.assessable) + ", errors " +
           std::to_string(s.errors) + ")\n";
    return out;
}

json encode_summary(const SimulationSummary& s) {
    json participants = json::array();
    for (const auto& p : s.participants) {
        json j{{"index", p.index}, {"assessable", p.assessable}, {"significant", p.significant}};
        j["z"] = p.z ? json(*p.z) : json(nullptr);
        j["contrast"] = p.contrast ? json(*p.contrast) : json(nullptr);
        j["favored"] = p.favored ? json(*p.favored) : json(nullptr);
        j["error"] = p.error_code ? json{{"code", *p.error_code}, {"message", p.error_message}} : json(nullptr);
        participants.push_back(std::move(j));
    }
    return {{"participants", std::move(participants)},
            {"summary",
             {{"participants", s.participants.size()},
              {"significant", s.significant},
              {"assessable", s.assessable},
              {"errors", s.errors},
              {"significantFraction", s.significant_fraction()}}}};
}

// In-process transport

InProcessTransport::InProcessTransport(std::shared_ptr<TrialStore> store, std::shared_ptr<ManualClock> clock,
                                       const std::string& study_id, bool demo_unlock)
    : store_(std::move(store)), clock_(std::move(clock)), study_(store_->get_published(study_id)),
      demo_unlock_(demo_unlock) {}

std::string InProcessTransport::create_user() { return store_->create_anonymous_user().user_id; }

json InProcessTransport::enroll(const EnrollRequest& request) {
    return encode_enrollment_header(store_->enroll(request));
}

void InProcessTransport::submit(const std::string& enrollment_id, const SubmitResult& result) {
    store_->record_task_result(enrollment_id, result);
}

json InProcessTransport::report(const std::string& enrollment_id) {
    // Same bytes the HTTP endpoint would return.
    return json::parse(encode_report_bundle(store_->report(enrollment_id, demo_unlock_)).dump());
}

void InProcessTransport::set_time(Timestamp now) { clock_->set(now); }

// HTTP transport

HttpTransport::HttpTransport(const std::string& base_url, const std::string& token, const std::string& study_id)
    : client_(base_url, token), study_(decode_study(client_.get("/api/v1/studies/" + study_id))) {}

std::string HttpTransport::create_user() {
    return client_.post("/api/v1/users", {{"acceptTerms", true}}).at("id").get<std::string>();
}

json HttpTransport::enroll(const EnrollRequest& r) {
    json answers = json::array();
    for (const Answer& a : r.eligibility_answers) answers.push_back(encode_answer(a));
    json body{{"userId", r.user_id},
              {"studyId", r.study_id},
              {"selections", r.selections},
              {"answers", std::move(answers)},
              {"consent", r.consent},
              {"utcOffsetMinutes", r.utc_offset_minutes}};
    if (r.seed) body["seed"] = *r.seed;
    return client_.post("/api/v1/enrollments", body);
}

void HttpTransport::submit(const std::string& enrollment_id, const SubmitResult& r) {
    json body{{"task", r.task_id}, {"payload", encode_payload(r.payload)}};
    if (r.study_day) body["studyDay"] = *r.study_day;
    client_.post("/api/v1/enrollments/" + enrollment_id + "/results", body);
}

json HttpTransport::report(const std::string& enrollment_id) {
    return client_.get("/api/v1/enrollments/" + enrollment_id + "/report");
}

void HttpTransport::set_time(Timestamp now) {
    client_.post("/api/v1/admin/clock", {{"now", format_timestamp(now)}});
}

LocalPlatform make_local_platform(const Study& study, std::uint64_t id_seed, Timestamp start) {
    LocalPlatform p;
    p.clock = std::make_shared<ManualClock>(start);
    p.store = std::make_shared<TrialStore>(std::make_shared<MemoryKv>(), std::make_shared<SeededIdGenerator>(id_seed),
                                           p.clock);
    Study draft = study;
    draft.metadata.published = false;
    draft.metadata.revision = 0;
    const SaveOutcome saved = p.store->save_draft(std::move(draft), 0);
    p.store->publish(saved.study_id, saved.revision);
    p.study_id = saved.study_id;
    return p;
}

} // namespace studyu
