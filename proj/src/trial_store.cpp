#include "studyu/trial_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <tuple>

#include "studyu/error.hpp"
#include "studyu/study_json.hpp"
#include "studyu/study_validate.hpp"

namespace studyu {

using nlohmann::json;

namespace {

constexpr std::size_t kSnapshotCacheLimit = 4096;

std::string study_key(const std::string& id) { return "study/" + id; }
std::string user_key(const std::string& id) { return "user/" + id; }
std::string enrollment_key(const std::string& id) { return "enrollment/" + id; }
std::string snapshot_key(const std::string& id) { return "snapshot/" + id; }
std::string results_prefix(const std::string& eid) { return "result/" + eid + "/"; }
std::string study_index_prefix(const std::string& sid) { return "index/study/" + sid + "/"; }
std::string user_index_prefix(const std::string& uid) { return "index/user/" + uid + "/"; }

std::string result_key(const std::string& eid, int day, const std::string& task_id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", day);
    return results_prefix(eid) + buf + "/" + task_id;
}

json parse_record(const std::string& bytes, const std::string& key) {
    try {
        return json::parse(bytes);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StorageUnavailable, "corrupt record " + key + ": " + e.what());
    }
}

std::vector<std::string> index_suffixes(const KvStore& kv, const std::string& prefix) {
    std::vector<std::string> out;
    for (const auto& [key, value] : kv.scan(prefix)) out.push_back(key.substr(prefix.size()));
    return out;
}

void check_identifier(const std::string& id, const char* what) {
    if (id.find('/') != std::string::npos) {
        throw Error(ErrorCode::BadRequest, std::string(what) + " must not contain '/'");
    }
}

} // namespace

json encode_user(const AnonymousUser& user) {
    return {{"id", user.user_id},
            {"createdAt", format_timestamp(user.created_at)},
            {"termsAcceptedAt", format_timestamp(user.terms_accepted_at)}};
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

TrialStore::TrialStore(std::shared_ptr<KvStore> kv, std::shared_ptr<IdGenerator> ids,
                       std::shared_ptr<const Clock> clock, StoreOptions options)
    : kv_(std::move(kv)), ids_(std::move(ids)), clock_(std::move(clock)), options_(options) {}

std::recursive_mutex& TrialStore::stripe(std::string_view key) const {
    return stripes_[std::hash<std::string_view>{}(key) % stripes_.size()];
}

// Studies

std::optional<TrialStore::StudyRecord> TrialStore::load_study(const std::string& study_id) const {
    auto bytes = kv_->get(study_key(study_id));
    if (!bytes) return std::nullopt;
    const json record = parse_record(*bytes, study_key(study_id));
    StudyRecord out;
    out.study = decode_study(record.at("document"));
    out.published = record.at("published").get<bool>();
    out.revision = record.at("revision").get<std::int64_t>();
    out.study.metadata.published = out.published;
    out.study.metadata.revision = out.revision;
    return out;
}

SaveOutcome TrialStore::save_draft(Study study, std::int64_t expected_revision) {
    if (expected_revision == 0 && study.metadata.study_id.empty()) study.metadata.study_id = ids_->next_uuid();
    const std::string id = study.metadata.study_id;
    if (id.empty()) throw Error(ErrorCode::BadRequest, "study id is required when updating");
    check_identifier(id, "study id");

    std::lock_guard lock(stripe(study_key(id)));
    auto current = load_study(id);
    if (current && current->published) throw Error(ErrorCode::AlreadyPublished, "study " + id + " is published");
    const std::int64_t stored = current ? current->revision : 0;
    if (stored != expected_revision) {
        throw Error(ErrorCode::RevisionConflict,
                    "study " + id + " is at revision " + std::to_string(stored) + ", not " +
                        std::to_string(expected_revision),
                    json{{"currentRevision", stored}});
    }
    study.metadata.revision = stored + 1;
    study.metadata.published = false;
    WriteBatch batch;
    batch.put(study_key(id),
              json{{"revision", study.metadata.revision}, {"published", false}, {"document", encode_study(study)}}.dump());
    kv_->commit(batch);
    return {id, study.metadata.revision};
}

void TrialStore::publish(const std::string& study_id, std::int64_t expected_revision) {
    std::lock_guard lock(stripe(study_key(study_id)));
    auto current = load_study(study_id);
    if (!current) throw Error(ErrorCode::NotFound, "no study " + study_id);
    if (current->published) throw Error(ErrorCode::AlreadyPublished, "study " + study_id + " is already published");
    if (current->revision != expected_revision) {
        throw Error(ErrorCode::RevisionConflict,
                    "study " + study_id + " is at revision " + std::to_string(current->revision) + ", not " +
                        std::to_string(expected_revision),
                    json{{"currentRevision", current->revision}});
    }
    const ValidationReport report = validate_study(current->study.details, current->study.metadata, true);
    if (!report.ok()) {
        throw Error(ErrorCode::ValidationFailed,
                    "study " + study_id + " has " + std::to_string(report.error_count()) + " validation error(s)",
                    encode_report(report));
    }
    current->study.metadata.published = true;
    WriteBatch batch;
    batch.put(study_key(study_id), json{{"revision", current->revision},
                                        {"published", true},
                                        {"document", encode_study(current->study)}}
                                       .dump());
    kv_->commit(batch);
}

void TrialStore::delete_draft(const std::string& study_id) {
    std::lock_guard lock(stripe(study_key(study_id)));
    auto current = load_study(study_id);
    if (!current) throw Error(ErrorCode::NotFound, "no study " + study_id);
    if (current->published) throw Error(ErrorCode::AlreadyPublished, "published studies cannot be deleted");
    WriteBatch batch;
    batch.erase(study_key(study_id));
    kv_->commit(batch);
}

Study TrialStore::get_study(const std::string& study_id) const {
    auto record = load_study(study_id);
    if (!record) throw Error(ErrorCode::NotFound, "no study " + study_id);
    return std::move(record->study);
}

Study TrialStore::get_published(const std::string& study_id) const {
    auto record = load_study(study_id);
    if (!record || !record->published) throw Error(ErrorCode::NotFound, "no published study " + study_id);
    return std::move(record->study);
}

std::vector<Study> TrialStore::list_studies() const {
    std::vector<Study> out;
    for (const auto& [key, bytes] : kv_->scan("study/")) {
        if (auto record = load_study(key.substr(6))) out.push_back(std::move(record->study));
    }
    return out;
}

std::vector<Study> TrialStore::list_published() const {
    std::vector<Study> out = list_studies();
    std::erase_if(out, [](const Study& s) { return !s.metadata.published; });
    return out;
}

// Participants

AnonymousUser TrialStore::create_anonymous_user() {
    AnonymousUser user;
    user.user_id = ids_->next_uuid();
    user.created_at = clock_->now();
    user.terms_accepted_at = user.created_at;
    WriteBatch batch;
    batch.put(user_key(user.user_id), encode_user(user).dump());
    kv_->commit(batch);
    return user;
}

std::optional<AnonymousUser> TrialStore::find_user(const std::string& user_id) const {
    auto bytes = kv_->get(user_key(user_id));
    if (!bytes) return std::nullopt;
    const json j = parse_record(*bytes, user_key(user_id));
    AnonymousUser user;
    user.user_id = j.at("id").get<std::string>();
    user.created_at = parse_timestamp(j.at("createdAt").get<std::string>()).value();
    user.terms_accepted_at = parse_timestamp(j.at("termsAcceptedAt").get<std::string>()).value();
    return user;
}

Enrollment TrialStore::enroll(const EnrollRequest& request) {
    std::lock_guard lock(stripe(user_key(request.user_id)));
    if (!find_user(request.user_id)) throw Error(ErrorCode::UserUnknown, "no user " + request.user_id);
    auto record = load_study(request.study_id);
    if (!record) throw Error(ErrorCode::NotFound, "no study " + request.study_id);
    if (!record->published) throw Error(ErrorCode::StudyNotPublished, "study " + request.study_id + " is not published");
    const StudyDetails& details = record->study.details;

    if (request.selections.size() > 2) {
        throw Error(ErrorCode::TooManyInterventions, "select exactly two interventions, not " +
                                                         std::to_string(request.selections.size()));
    }
    if (request.selections.size() < 2) {
        throw Error(ErrorCode::TooFewInterventions, "select exactly two interventions, not " +
                                                        std::to_string(request.selections.size()));
    }
    for (const std::string& id : request.selections) {
        if (!details.find_intervention(id)) throw Error(ErrorCode::UnknownIntervention, "no intervention " + id);
    }
    if (request.selections[0] == request.selections[1]) {
        throw Error(ErrorCode::SameIntervention, "the two interventions must differ");
    }

    AnswerSet answers = conform_answers(details.eligibility_questions, request.eligibility_answers);
    const EligibilityVerdict verdict =
        check_eligibility(details.eligibility_criteria, answers, details.eligibility_questions);
    if (!verdict.eligible) {
        json reasons = json::array();
        json failed = json::array();
        for (const auto& f : verdict.failed_criteria) {
            reasons.push_back(f.reason);
            failed.push_back({{"criterion", f.criterion_id}, {"reason", f.reason}});
        }
        throw Error(ErrorCode::NotEligible, "you are not eligible for this study",
                    json{{"reasons", std::move(reasons)}, {"failedCriteria", std::move(failed)}});
    }
    if (!request.consent) throw Error(ErrorCode::ConsentRequired, "consent is required to take part");

    const Timestamp now = clock_->now();
    Enrollment e;
    e.enrollment_id = ids_->next_uuid();
    e.user_id = request.user_id;
    e.study_id = request.study_id;
    e.study_revision = record->revision;
    e.selections = {request.selections[0], request.selections[1]};
    e.phase_sequence = generate_phase_sequence(details.schedule, e.selections[0], e.selections[1],
                                               request.seed ? *request.seed : ids_->next_seed());
    e.eligibility_answers = std::move(answers);
    e.consent_given_at = now;
    e.utc_offset_minutes = request.utc_offset_minutes;
    e.started_on = local_date(now, request.utc_offset_minutes);
    e.status = EnrollmentStatus::Active;
    e.snapshot = std::make_shared<const Study>(record->study);

    WriteBatch batch;
    batch.put(enrollment_key(e.enrollment_id), encode_enrollment_header(e).dump());
    batch.put(snapshot_key(e.enrollment_id), encode_study(*e.snapshot).dump());
    batch.put(study_index_prefix(e.study_id) + e.enrollment_id, "");
    batch.put(user_index_prefix(e.user_id) + e.enrollment_id, "");
    kv_->commit(batch);
    return e;
}

std::shared_ptr<const Study> TrialStore::load_snapshot(const std::string& enrollment_id) const {
    {
        std::lock_guard lock(snapshot_cache_mutex_);
        auto it = snapshot_cache_.find(enrollment_id);
        if (it != snapshot_cache_.end()) return it->second;
    }
    auto bytes = kv_->get(snapshot_key(enrollment_id));
    if (!bytes) throw Error(ErrorCode::StorageUnavailable, "missing snapshot for enrollment " + enrollment_id);
    auto study = std::make_shared<const Study>(decode_study(parse_record(*bytes, snapshot_key(enrollment_id))));
    std::lock_guard lock(snapshot_cache_mutex_);
    if (snapshot_cache_.size() >= kSnapshotCacheLimit) snapshot_cache_.clear();
    snapshot_cache_.emplace(enrollment_id, study);
    return study;
}

Enrollment TrialStore::load_enrollment(const std::string& enrollment_id) const {
    auto bytes = kv_->get(enrollment_key(enrollment_id));
    if (!bytes) throw Error(ErrorCode::NotFound, "no enrollment " + enrollment_id);
    Enrollment e = decode_enrollment_header(parse_record(*bytes, enrollment_key(enrollment_id)));
    e.snapshot = load_snapshot(enrollment_id);
    return e;
}

bool TrialStore::past_last_day(const Enrollment& e, int slack_days) const {
    return e.study_day_at(clock_->now()) > e.phase_sequence.total_days + slack_days;
}

TaskResult TrialStore::record_task_result(const std::string& enrollment_id, const SubmitResult& submission) {
    std::lock_guard lock(stripe(enrollment_key(enrollment_id)));
    Enrollment e = load_enrollment(enrollment_id);
    if (e.status != EnrollmentStatus::Active) {
        throw Error(ErrorCode::EnrollmentNotActive, "enrollment is " + std::string(to_token(e.status)));
    }
    const Timestamp now = clock_->now();
    const int today = e.study_day_at(now);
    const int total = e.phase_sequence.total_days;
    const int day = submission.study_day.value_or(today);

    if (day > total || today > total + 1) {
        e.status = EnrollmentStatus::Finished;
        WriteBatch batch;
        batch.put(enrollment_key(enrollment_id), encode_enrollment_header(e).dump());
        kv_->commit(batch);
        throw Error(ErrorCode::EnrollmentNotActive,
                    "the study ended on day " + std::to_string(total) + "; enrollment is now finished");
    }
    if (day < 1 || day > today) {
        throw Error(ErrorCode::UnscheduledTask, "study day " + std::to_string(day) + " is not open (today is day " +
                                                    std::to_string(today) + ")");
    }
    if (day < today - 1) {
        throw Error(ErrorCode::LateSubmission,
                    "results for day " + std::to_string(day) + " were due by the end of day " + std::to_string(day + 1));
    }
    const DayPlan plan = day_plan(e.phase_sequence, e.details(), day);
    if (!plan.includes(submission.task_id)) {
        throw Error(ErrorCode::UnscheduledTask,
                    "task " + submission.task_id + " is not scheduled on day " + std::to_string(day));
    }
    const Task& task = *e.details().find_task(submission.task_id);

    TaskResult result;
    result.task_id = submission.task_id;
    result.study_day = day;
    result.completed_at = now;
    if (task.type == TaskType::Checkmark) {
        if (!std::holds_alternative<CheckmarkCompleted>(submission.payload)) {
            throw Error(ErrorCode::PayloadMismatch, "task " + task.task_id + " expects a completion checkmark");
        }
        result.payload = CheckmarkCompleted{};
    } else {
        const AnswerSet* raw = std::get_if<AnswerSet>(&submission.payload);
        if (raw == nullptr) throw Error(ErrorCode::PayloadMismatch, "task " + task.task_id + " expects answers");
        AnswerSet answers = conform_answers(task.questions, raw->answers());
        if (!next_question(task.questions, answers).done()) {
            throw Error(ErrorCode::IncompleteQuestionnaire, "questionnaire " + task.task_id + " is incomplete");
        }
        result.payload = std::move(answers);
    }

    const std::string key = result_key(enrollment_id, day, task.task_id);
    if (kv_->get(key)) {
        throw Error(ErrorCode::DuplicateResult,
                    "task " + task.task_id + " was already completed on day " + std::to_string(day));
    }
    result.result_id = ids_->next_uuid();
    WriteBatch batch;
    batch.put(key, encode_task_result(result).dump());
    kv_->commit(batch);
    return result;
}

void TrialStore::finish_enrollment(const std::string& enrollment_id) {
    std::lock_guard lock(stripe(enrollment_key(enrollment_id)));
    Enrollment e = load_enrollment(enrollment_id);
    if (e.status != EnrollmentStatus::Active) {
        throw Error(ErrorCode::EnrollmentNotActive, "enrollment is " + std::string(to_token(e.status)));
    }
    e.status = EnrollmentStatus::Finished;
    WriteBatch batch;
    batch.put(enrollment_key(enrollment_id), encode_enrollment_header(e).dump());
    kv_->commit(batch);
}

void TrialStore::erase_enrollment(const Enrollment& e, WriteBatch& batch) const {
    batch.erase(enrollment_key(e.enrollment_id));
    batch.erase(snapshot_key(e.enrollment_id));
    batch.erase(study_index_prefix(e.study_id) + e.enrollment_id);
    batch.erase(user_index_prefix(e.user_id) + e.enrollment_id);
    for (const auto& [key, value] : kv_->scan(results_prefix(e.enrollment_id))) batch.erase(key);
}

void TrialStore::opt_out(const std::string& enrollment_id) {
    std::lock_guard lock(stripe(enrollment_key(enrollment_id)));
    auto bytes = kv_->get(enrollment_key(enrollment_id));
    if (!bytes) throw Error(ErrorCode::EnrollmentNotActive, "no active enrollment " + enrollment_id);
    Enrollment e = load_enrollment(enrollment_id);
    if (e.status != EnrollmentStatus::Active || past_last_day(e, 0)) {
        throw Error(ErrorCode::EnrollmentNotActive, "finished enrollments are kept and cannot be opted out of");
    }
    WriteBatch batch;
    erase_enrollment(e, batch);
    kv_->commit(batch);
    std::lock_guard cache(snapshot_cache_mutex_);
    snapshot_cache_.erase(enrollment_id);
}

void TrialStore::delete_user(const std::string& user_id) {
    std::lock_guard lock(stripe(user_key(user_id)));
    if (!find_user(user_id)) throw Error(ErrorCode::UserUnknown, "no user " + user_id);
    for (const std::string& eid : index_suffixes(*kv_, user_index_prefix(user_id))) {
        std::lock_guard enrollment_lock(stripe(enrollment_key(eid)));
        if (!kv_->get(enrollment_key(eid))) continue;
        Enrollment e = load_enrollment(eid);
        WriteBatch batch;
        if (e.status == EnrollmentStatus::Finished || past_last_day(e, 0)) {
            e.user_id = std::string(kDeletedUser);
            e.status = EnrollmentStatus::Finished;
            batch.put(enrollment_key(eid), encode_enrollment_header(e).dump());
            batch.erase(user_index_prefix(user_id) + eid);
        } else {
            erase_enrollment(e, batch);
            std::lock_guard cache(snapshot_cache_mutex_);
            snapshot_cache_.erase(eid);
        }
        kv_->commit(batch);
    }
    WriteBatch batch;
    batch.erase(user_key(user_id));
    kv_->commit(batch);
}

Enrollment TrialStore::get_enrollment(const std::string& enrollment_id) const {
    Enrollment e = load_enrollment(enrollment_id);
    for (const auto& [key, bytes] : kv_->scan(results_prefix(enrollment_id))) {
        e.results.push_back(decode_task_result(parse_record(bytes, key)));
    }
    return e;
}

std::vector<std::string> TrialStore::enrollments_of_user(const std::string& user_id) const {
    return index_suffixes(*kv_, user_index_prefix(user_id));
}

std::vector<std::string> TrialStore::enrollments_of_study(const std::string& study_id) const {
    return index_suffixes(*kv_, study_index_prefix(study_id));
}

ReportBundle TrialStore::report(const std::string& enrollment_id, bool demo_unlock) const {
    return build_report(get_enrollment(enrollment_id), clock_->now(), demo_unlock);
}

json TrialStore::schedule(const std::string& enrollment_id) const {
    const Enrollment e = get_enrollment(enrollment_id);
    const CompletionSet done = e.completions();
    json days = json::array();
    for (int d = 1; d <= e.phase_sequence.total_days; ++d) {
        const DayPlan plan = day_plan(e.phase_sequence, e.details(), d, e.started_on);
        json tasks = json::array();
        for (const PlannedTask& t : plan.tasks) {
            json windows = json::array();
            for (const TimeWindow& w : t.windows) {
                windows.push_back({{"start", format_time_of_day(w.start)}, {"end", format_time_of_day(w.end)}});
            }
            tasks.push_back({{"task", t.task_id},
                             {"title", e.details().find_task(t.task_id)->title},
                             {"kind", t.kind == TaskKind::Intervention ? "intervention" : "observation"},
                             {"windows", std::move(windows)},
                             {"completed", done.count({d, t.task_id}) > 0}});
        }
        days.push_back({{"studyDay", d},
                        {"date", format_date(plan.calendar_date)},
                        {"phaseIndex", plan.phase_index},
                        {"intervention", plan.active_intervention ? json(*plan.active_intervention) : json(nullptr)},
                        {"tasks", std::move(tasks)}});
    }
    return {{"enrollmentId", e.enrollment_id},
            {"studyId", e.study_id},
            {"status", std::string(to_token(e.status))},
            {"startedOn", format_date(e.started_on)},
            {"today", e.study_day_at(clock_->now())},
            {"totalDays", e.phase_sequence.total_days},
            {"minimumStudyLengthDays", e.details().minimum_study_length_days},
            {"selections", e.selections},
            {"phaseSequence", encode_phase_sequence(e.phase_sequence)},
            {"days", std::move(days)}};
}

std::string TrialStore::export_csv(const std::string& study_id) const {
    auto record = load_study(study_id);
    if (!record) throw Error(ErrorCode::NotFound, "no study " + study_id);
    if (!record->published) throw Error(ErrorCode::StudyNotPublished, "study " + study_id + " is not published");
    const std::vector<StudyResult>& columns = record->study.details.results;

    std::string out = "participant_id,enrollment_day,study_day,phase_index,active_intervention,task_id,property_id";
    for (const StudyResult& c : columns) out += "," + csv_field(c.column_name);
    out += "\r\n";

    struct Row {
        std::string participant;
        int study_day;
        std::string task_id;
        std::size_t column;
        std::string line;
    };
    std::vector<Row> rows;
    for (const std::string& eid : enrollments_of_study(study_id)) {
        const Enrollment e = get_enrollment(eid);
        const std::string participant = options_.export_include_user_pseudonym ? e.user_id : e.enrollment_id;
        for (const TaskResult& r : e.results) {
            const Phase& phase = e.phase_sequence.phase_for_day(r.study_day);
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const DataReference& ref = columns[c].reference;
                if (ref.task_id != r.task_id) continue;
                std::string value;
                if (std::holds_alternative<CheckmarkCompleted>(r.payload)) {
                    if (ref.property_id != kCompletedProperty) continue;
                    value = "1";
                } else {
                    const Answer* a = std::get<AnswerSet>(r.payload).find(ref.property_id);
                    if (a == nullptr) continue;
                    if (const bool* b = std::get_if<bool>(&a->value)) {
                        value = *b ? "1" : "0";
                    } else if (const double* d = std::get_if<double>(&a->value)) {
                        value = format_number(*d);
                    } else {
                        const auto& chosen = std::get<std::set<std::string>>(a->value);
                        for (const std::string& id : chosen) value += (value.empty() ? "" : ";") + id;
                    }
                }
                std::string line = csv_field(participant) + "," + format_date(e.started_on) + "," +
                                   std::to_string(r.study_day) + "," + std::to_string(phase.phase_index) + "," +
                                   csv_field(phase.intervention_id ? *phase.intervention_id : "baseline") + "," +
                                   csv_field(r.task_id) + "," + csv_field(ref.property_id);
                for (std::size_t k = 0; k < columns.size(); ++k) {
                    line += ",";
                    if (k == c) line += csv_field(value);
                }
                rows.push_back({participant, r.study_day, r.task_id, c, std::move(line)});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.participant, a.study_day, a.task_id, a.column) <
               std::tie(b.participant, b.study_day, b.task_id, b.column);
    });
    for (const Row& r : rows) out += r.line + "\r\n";
    return out;
}

} // namespace studyu
