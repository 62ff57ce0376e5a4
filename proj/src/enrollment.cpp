#include "studyu/enrollment.hpp"

#include "studyu/error.hpp"
#include "studyu/study_json.hpp"

namespace studyu {

using nlohmann::json;

std::string_view to_token(EnrollmentStatus s) {
    switch (s) {
        case EnrollmentStatus::Active: return "active";
        case EnrollmentStatus::Finished: return "finished";
        case EnrollmentStatus::OptedOut: return "opted_out";
    }
    return "";
}

namespace {

EnrollmentStatus status_from_token(const std::string& token) {
    if (token == "active") return EnrollmentStatus::Active;
    if (token == "finished") return EnrollmentStatus::Finished;
    if (token == "opted_out") return EnrollmentStatus::OptedOut;
    throw Error(ErrorCode::StorageUnavailable, "corrupt enrollment status \"" + token + "\"");
}

json encode_answers(const AnswerSet& answers) {
    json out = json::array();
    for (const Answer& a : answers) out.push_back(encode_answer(a));
    return out;
}

AnswerSet decode_answers(const json& node, const std::string& path) {
    if (!node.is_array()) throw Error(ErrorCode::TypeMismatch, path + ": expected an array", json{{"path", path}});
    AnswerSet out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.add(decode_answer(node[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

} // namespace

int Enrollment::study_day_at(Timestamp now) const {
    return static_cast<int>((local_date(now, utc_offset_minutes) - started_on).count()) + 1;
}

CompletionSet Enrollment::completions() const {
    CompletionSet out;
    for (const TaskResult& r : results) out.emplace(r.study_day, r.task_id);
    return out;
}

json encode_phase_sequence(const PhaseSequence& seq) {
    json phases = json::array();
    for (const Phase& p : seq.phases) {
        phases.push_back({{"index", p.phase_index},
                          {"intervention", p.intervention_id ? json(*p.intervention_id) : json(nullptr)},
                          {"startDay", p.start_day},
                          {"lengthDays", p.length_days}});
    }
    return {{"phases", std::move(phases)},
            {"totalDays", seq.total_days},
            {"seed", seq.seed},
            {"interventionA", seq.intervention_a},
            {"interventionB", seq.intervention_b}};
}

PhaseSequence decode_phase_sequence(const json& node) {
    PhaseSequence seq;
    for (const json& p : node.at("phases")) {
        Phase phase;
        phase.phase_index = p.at("index").get<int>();
        if (!p.at("intervention").is_null()) phase.intervention_id = p.at("intervention").get<std::string>();
        phase.start_day = p.at("startDay").get<int>();
        phase.length_days = p.at("lengthDays").get<int>();
        seq.phases.push_back(std::move(phase));
    }
    seq.total_days = node.at("totalDays").get<int>();
    seq.seed = node.at("seed").get<std::uint64_t>();
    seq.intervention_a = node.at("interventionA").get<std::string>();
    seq.intervention_b = node.at("interventionB").get<std::string>();
    return seq;
}

ResultPayload decode_result_payload(const json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("type") || !node["type"].is_string()) {
        throw Error(ErrorCode::MalformedDocument, path + ": expected {\"type\": ...}", json{{"path", path}});
    }
    const std::string type = node["type"].get<std::string>();
    if (type == "completed") {
        if (node.size() != 1) throw Error(ErrorCode::UnknownField, path + ": unexpected member", json{{"path", path}});
        return CheckmarkCompleted{};
    }
    if (type == "answers") {
        if (!node.contains("answers")) {
            throw Error(ErrorCode::MalformedDocument, path + ".answers: missing required member",
                        json{{"path", path + ".answers"}});
        }
        if (node.size() != 2) throw Error(ErrorCode::UnknownField, path + ": unexpected member", json{{"path", path}});
        return decode_answers(node["answers"], path + ".answers");
    }
    throw Error(ErrorCode::TypeMismatch, path + ".type: unknown payload type \"" + type + "\"",
                json{{"path", path + ".type"}});
}

json encode_task_result(const TaskResult& r) {
    json payload = std::holds_alternative<CheckmarkCompleted>(r.payload)
                       ? json{{"type", "completed"}}
                       : json{{"type", "answers"}, {"answers", encode_answers(std::get<AnswerSet>(r.payload))}};
    return {{"id", r.result_id},
            {"task", r.task_id},
            {"studyDay", r.study_day},
            {"completedAt", format_timestamp(r.completed_at)},
            {"payload", std::move(payload)}};
}

TaskResult decode_task_result(const json& node) {
    TaskResult r;
    r.result_id = node.at("id").get<std::string>();
    r.task_id = node.at("task").get<std::string>();
    r.study_day = node.at("studyDay").get<int>();
    r.completed_at = parse_timestamp(node.at("completedAt").get<std::string>()).value();
    r.payload = decode_result_payload(node.at("payload"), "$.payload");
    return r;
}

json encode_enrollment_header(const Enrollment& e) {
    return {{"id", e.enrollment_id},
            {"userId", e.user_id},
            {"studyId", e.study_id},
            {"studyRevision", e.study_revision},
            {"selections", e.selections},
            {"phaseSequence", encode_phase_sequence(e.phase_sequence)},
            {"eligibilityAnswers", encode_answers(e.eligibility_answers)},
            {"consentGivenAt", format_timestamp(e.consent_given_at)},
            {"startedOn", format_date(e.started_on)},
            {"utcOffsetMinutes", e.utc_offset_minutes},
            {"status", std::string(to_token(e.status))}};
}

Enrollment decode_enrollment_header(const json& node) {
    Enrollment e;
    e.enrollment_id = node.at("id").get<std::string>();
    e.user_id = node.at("userId").get<std::string>();
    e.study_id = node.at("studyId").get<std::string>();
    e.study_revision = node.at("studyRevision").get<std::int64_t>();
    e.selections = node.at("selections").get<std::array<std::string, 2>>();
    e.phase_sequence = decode_phase_sequence(node.at("phaseSequence"));
    e.eligibility_answers = decode_answers(node.at("eligibilityAnswers"), "$.eligibilityAnswers");
    e.consent_given_at = parse_timestamp(node.at("consentGivenAt").get<std::string>()).value();
    e.started_on = parse_date(node.at("startedOn").get<std::string>()).value();
    e.utc_offset_minutes = node.at("utcOffsetMinutes").get<int>();
    e.status = status_from_token(node.at("status").get<std::string>());
    return e;
}

} // namespace studyu
