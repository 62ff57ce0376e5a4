#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include "studyu/simulator.hpp"
#include "studyu/study_json.hpp"
#include "studyu/trial_store.hpp"
#include "support.hpp"

using namespace studyu;
using nlohmann::json;
using testsupport::capture_error;

namespace {

namespace fs = std::filesystem;

const std::string kTea = "willow_bark_tea";
const std::string kBalm = "arnica_balm";
const Timestamp kStart = parse_timestamp("2024-01-01T08:00:00Z").value();

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() / ("studyu-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Platform {
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(kStart);
    std::shared_ptr<MemoryKv> kv = std::make_shared<MemoryKv>();
    std::shared_ptr<TrialStore> store;

    explicit Platform(StoreOptions options = {})
        : store(std::make_shared<TrialStore>(kv, std::make_shared<SeededIdGenerator>(1), clock, options)) {}

    std::string publish(Study study) {
        study.metadata.published = false;
        const SaveOutcome saved = store->save_draft(study, 0);
        store->publish(saved.study_id, saved.revision);
        return saved.study_id;
    }

    void go_to_day(int day) { clock->set(kStart + std::chrono::days{day - 1}); }
};

Study back_pain() { return testsupport::load_fixture("back_pain.json"); }

std::vector<Answer> eligible_answers() {
    return {{"q_chronic", true, {}}, {"q_sex", std::set<std::string>{"male"}, {}}};
}

EnrollRequest request(const std::string& user, const std::string& study) {
    EnrollRequest r;
    r.user_id = user;
    r.study_id = study;
    r.selections = {kTea, kBalm};
    r.eligibility_answers = eligible_answers();
    r.consent = true;
    r.seed = 7;
    return r;
}

SubmitResult pain(int value, std::optional<int> day = std::nullopt) {
    return {"pain_diary", day, AnswerSet({{"pain", double(value), {}}})};
}

SubmitResult done(const std::string& task, std::optional<int> day = std::nullopt) {
    return {task, day, CheckmarkCompleted{}};
}

void append_bytes(const fs::path& file, const std::string& bytes) {
    std::ofstream(file, std::ios::binary | std::ios::app) << bytes;
}

} // namespace

TEST_CASE("write-ahead log survives reopening") {
    TempDir dir;
    {
        WalKv kv(dir.path);
        WriteBatch b1;
        b1.put("a", "1");
        b1.put("b", "2");
        kv.commit(b1);
        WriteBatch b2;
        b2.erase("a");
        b2.put("c", std::string("x\0y", 3));
        kv.commit(b2);
    }
    WalKv kv(dir.path);
    CHECK_FALSE(kv.get("a").has_value());
    CHECK(kv.get("b") == "2");
    CHECK(kv.get("c") == std::string("x\0y", 3));
    CHECK(kv.scan("").size() == 2);
}

TEST_CASE("a torn or corrupt log tail is discarded") {
    TempDir dir;
    {
        WalKv kv(dir.path);
        WriteBatch b;
        b.put("kept", "yes");
        kv.commit(b);
    }
    const auto size_before = fs::file_size(dir.path / "wal.log");
    WriteBatch lost;
    lost.put("lost", "no");
    const std::string record = frame_record(encode_batch(lost));
    SUBCASE("half a record") { append_bytes(dir.path / "wal.log", record.substr(0, record.size() / 2)); }
    SUBCASE("bad checksum") {
        std::string bad = record;
        bad.back() ^= 0x5a;
        append_bytes(dir.path / "wal.log", bad);
    }
    SUBCASE("garbage") { append_bytes(dir.path / "wal.log", "\xff\xff\xff\x7f garbage"); }
    {
        WalKv kv(dir.path);
        CHECK(kv.get("kept") == "yes");
        CHECK_FALSE(kv.get("lost").has_value());
        WriteBatch after;
        after.put("after", "1");
        kv.commit(after);
    }
    CHECK(fs::file_size(dir.path / "wal.log") > size_before);
    WalKv again(dir.path);
    CHECK(again.get("after") == "1");
    CHECK(again.get("kept") == "yes");
}

TEST_CASE("checkpoint moves the log into the snapshot") {
    TempDir dir;
    {
        WalKv kv(dir.path);
        for (int i = 0; i < 50; ++i) {
            WriteBatch b;
            b.put("k" + std::to_string(i), std::string(100, 'v'));
            kv.commit(b);
        }
        CHECK(kv.wal_bytes() > 5000);
        kv.checkpoint();
        CHECK(kv.wal_bytes() == 0);
        WriteBatch b;
        b.erase("k0");
        kv.commit(b);
    }
    CHECK(fs::exists(dir.path / "snapshot.db"));
    WalKv kv(dir.path);
    CHECK(kv.scan("k").size() == 49);
    CHECK_FALSE(kv.get("k0").has_value());
}

TEST_CASE("automatic checkpoint when the log grows") {
    TempDir dir;
    {
        WalKv kv(dir.path, WalOptions{false, 4096});
        for (int i = 0; i < 100; ++i) {
            WriteBatch b;
            b.put("k" + std::to_string(i), std::string(200, 'v'));
            kv.commit(b);
        }
        CHECK(kv.wal_bytes() < 4096);
    }
    CHECK(WalKv(dir.path).scan("k").size() == 100);
}

TEST_CASE("a corrupt snapshot makes the store unavailable") {
    TempDir dir;
    {
        WalKv kv(dir.path);
        WriteBatch b;
        b.put("a", "1");
        kv.commit(b);
        kv.checkpoint();
    }
    append_bytes(dir.path / "snapshot.db", "junk");
    CHECK(capture_error([&] { WalKv kv(dir.path); }).code() == ErrorCode::StorageUnavailable);
}

TEST_CASE("store state persists across restarts") {
    TempDir dir;
    std::string study_id, enrollment_id;
    auto clock = std::make_shared<ManualClock>(kStart);
    {
        TrialStore store(std::make_shared<WalKv>(dir.path), std::make_shared<SeededIdGenerator>(3), clock);
        const SaveOutcome saved = store.save_draft(back_pain(), 0);
        store.publish(saved.study_id, saved.revision);
        study_id = saved.study_id;
        const AnonymousUser user = store.create_anonymous_user();
        enrollment_id = store.enroll(request(user.user_id, study_id)).enrollment_id;
        store.record_task_result(enrollment_id, pain(3));
    }
    TrialStore store(std::make_shared<WalKv>(dir.path), std::make_shared<SeededIdGenerator>(4), clock);
    CHECK(store.list_published().size() == 1);
    const Enrollment e = store.get_enrollment(enrollment_id);
    REQUIRE(e.results.size() == 1);
    CHECK(e.results[0].task_id == "pain_diary");
}

TEST_CASE("draft saves are optimistic single-writer") {
    Platform p;
    Study s = back_pain();
    const SaveOutcome first = p.store->save_draft(s, 0);
    CHECK(first.revision == 1);
    CHECK(first.study_id == s.metadata.study_id);
    for (int rev = 1; rev < 5; ++rev) CHECK(p.store->save_draft(s, rev).revision == rev + 1);

    std::atomic<int> wins{0}, conflicts{0};
    std::vector<std::thread> writers;
    for (int i = 0; i < 8; ++i) {
        writers.emplace_back([&, i] {
            Study mine = s;
            mine.metadata.title = "writer " + std::to_string(i);
            try {
                if (p.store->save_draft(mine, 5).revision == 6) ++wins;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::RevisionConflict) ++conflicts;
            }
        });
    }
    for (auto& t : writers) t.join();
    CHECK(wins == 1);
    CHECK(conflicts == 7);
    CHECK(p.store->get_study(s.metadata.study_id).metadata.revision == 6);

    const Error stale = capture_error([&] { p.store->save_draft(s, 5); });
    CHECK(stale.code() == ErrorCode::RevisionConflict);
    CHECK(stale.details().at("currentRevision") == 6);
}

TEST_CASE("new studies without an id get a generated one") {
    Platform p;
    Study s = back_pain();
    s.metadata.study_id.clear();
    const SaveOutcome saved = p.store->save_draft(s, 0);
    CHECK(is_uuid_v4(saved.study_id));
    s.metadata.study_id = "a/b";
    CHECK(capture_error([&] { p.store->save_draft(s, 0); }).code() == ErrorCode::BadRequest);
}

TEST_CASE("publishing") {
    Platform p;
    CHECK(capture_error([&] { p.store->publish("missing", 1); }).code() == ErrorCode::NotFound);

    Study bad = back_pain();
    bad.metadata.study_id = "no-consent";
    bad.details.consent.clear();
    p.store->save_draft(bad, 0);
    const Error invalid = capture_error([&] { p.store->publish("no-consent", 1); });
    CHECK(invalid.code() == ErrorCode::ValidationFailed);
    CHECK(invalid.details().at("findings").size() == 1);

    const SaveOutcome saved = p.store->save_draft(back_pain(), 0);
    CHECK(capture_error([&] { p.store->publish(saved.study_id, 3); }).code() == ErrorCode::RevisionConflict);
    CHECK(p.store->list_published().empty());
    p.store->publish(saved.study_id, saved.revision);
    REQUIRE(p.store->list_published().size() == 1);
    CHECK(p.store->get_published(saved.study_id).metadata.published);
    CHECK(capture_error([&] { p.store->publish(saved.study_id, saved.revision); }).code() ==
          ErrorCode::AlreadyPublished);
    CHECK(capture_error([&] { p.store->save_draft(back_pain(), saved.revision); }).code() ==
          ErrorCode::AlreadyPublished);
    CHECK(capture_error([&] { p.store->delete_draft(saved.study_id); }).code() == ErrorCode::AlreadyPublished);
    CHECK(capture_error([&] { p.store->get_published("no-consent"); }).code() == ErrorCode::NotFound);

    p.store->delete_draft("no-consent");
    CHECK(capture_error([&] { p.store->get_study("no-consent"); }).code() == ErrorCode::NotFound);
    CHECK(p.store->list_studies().size() == 1);
}

TEST_CASE("anonymous users carry only ids and timestamps") {
    Platform p;
    const std::regex uuid{"[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}"};
    std::set<std::string> ids;
    for (int i = 0; i < 50; ++i) {
        const AnonymousUser u = p.store->create_anonymous_user();
        CHECK(std::regex_match(u.user_id, uuid));
        ids.insert(u.user_id);
        const json stored = json::parse(p.kv->get("user/" + u.user_id).value());
        std::set<std::string> keys;
        for (auto it = stored.begin(); it != stored.end(); ++it) keys.insert(it.key());
        CHECK(keys == std::set<std::string>{"createdAt", "id", "termsAcceptedAt"});
    }
    CHECK(ids.size() == 50);

    SecureIdGenerator secure;
    const std::string a = secure.next_uuid(), b = secure.next_uuid();
    CHECK(a != b);
    CHECK(std::regex_match(a, uuid));
    CHECK(is_uuid_v4(a));
    CHECK_FALSE(is_uuid_v4("00000000-0000-1000-8000-000000000000"));
}

TEST_CASE("enrollment preconditions") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string user = p.store->create_anonymous_user().user_id;

    auto code = [&](EnrollRequest r) { return capture_error([&] { p.store->enroll(r); }).code(); };
    EnrollRequest r = request(user, study);

    r.selections = {kTea, kBalm, "warming_pad"};
    CHECK(code(r) == ErrorCode::TooManyInterventions);
    r.selections = {kTea};
    CHECK(code(r) == ErrorCode::TooFewInterventions);
    r.selections = {kTea, "yoga"};
    CHECK(code(r) == ErrorCode::UnknownIntervention);
    r.selections = {kTea, kTea};
    CHECK(code(r) == ErrorCode::SameIntervention);

    r = request("nobody", study);
    CHECK(code(r) == ErrorCode::UserUnknown);
    r = request(user, "missing");
    CHECK(code(r) == ErrorCode::NotFound);

    Study draft = back_pain();
    draft.metadata.study_id = "draft";
    p.store->save_draft(draft, 0);
    CHECK(code(request(user, "draft")) == ErrorCode::StudyNotPublished);

    r = request(user, study);
    r.eligibility_answers = {{"q_chronic", true, {}}, {"q_sex", std::set<std::string>{"female"}, {}},
                             {"q_pregnant", true, {}}};
    const Error ineligible = capture_error([&] { p.store->enroll(r); });
    CHECK(ineligible.code() == ErrorCode::NotEligible);
    REQUIRE(ineligible.details().at("reasons").size() == 1);
    CHECK(ineligible.details().at("reasons")[0] ==
          "For safety reasons, pregnant individuals cannot participate in the study.");
    CHECK(ineligible.details().at("failedCriteria")[0].at("criterion") == "not_pregnant");

    r = request(user, study);
    r.eligibility_answers = {{"q_chronic", true, {}}};
    CHECK(code(r) == ErrorCode::IncompleteQuestionnaire);

    r = request(user, study);
    r.consent = false;
    CHECK(code(r) == ErrorCode::ConsentRequired);
    CHECK(p.store->enrollments_of_user(user).empty());
}

TEST_CASE("pinned seeds give reproducible phase sequences") {
    Platform p;
    Study randomized = back_pain();
    randomized.metadata.study_id = "randomized";
    randomized.details.schedule.sequence = SequenceKind::Randomized;
    randomized.details.schedule.number_of_cycles = 4;
    randomized.details.schedule.phase_duration_days = 3;
    const std::string study = p.publish(randomized);
    const Enrollment a = p.store->enroll(request(p.store->create_anonymous_user().user_id, study));
    const Enrollment b = p.store->enroll(request(p.store->create_anonymous_user().user_id, study));
    CHECK(a.phase_sequence == b.phase_sequence);
    CHECK(a.phase_sequence.seed == 7);
    CHECK(a.phase_sequence == generate_phase_sequence(randomized.details.schedule, kTea, kBalm, 7));

    const std::string fixture = p.publish(back_pain());
    const Enrollment c = p.store->enroll(request(p.store->create_anonymous_user().user_id, fixture));
    std::string order;
    for (const Phase& ph : c.phase_sequence.phases) order += *ph.intervention_id == kTea ? "A" : "B";
    CHECK(order == "ABAB");
    CHECK(c.status == EnrollmentStatus::Active);
    CHECK(format_date(c.started_on) == "2024-01-01");
    CHECK(c.snapshot->details == back_pain().details);
}

TEST_CASE("task results") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string user = p.store->create_anonymous_user().user_id;
    const std::string eid = p.store->enroll(request(user, study)).enrollment_id;
    auto code = [&](const SubmitResult& r) { return capture_error([&] { p.store->record_task_result(eid, r); }).code(); };

    p.go_to_day(1);
    const TaskResult first = p.store->record_task_result(eid, pain(6));
    CHECK(first.study_day == 1);
    CHECK(code(done("pain_diary")) == ErrorCode::PayloadMismatch);
    CHECK(code({"drink_tea", std::nullopt, AnswerSet{}}) == ErrorCode::PayloadMismatch);
    CHECK(code(pain(4)) == ErrorCode::DuplicateResult);
    CHECK(code(done("apply_balm")) == ErrorCode::UnscheduledTask);
    CHECK(code(done("drink_tea", 2)) == ErrorCode::UnscheduledTask);
    CHECK(code(pain(11)) == ErrorCode::InvalidAnswer);
    CHECK(code({"pain_diary", std::nullopt, AnswerSet{}}) == ErrorCode::IncompleteQuestionnaire);
    CHECK(capture_error([&] { p.store->record_task_result("missing", pain(1)); }).code() == ErrorCode::NotFound);

    p.go_to_day(3);
    CHECK(code(done("drink_tea", 1)) == ErrorCode::LateSubmission);
    p.store->record_task_result(eid, done("drink_tea", 2));
    p.store->record_task_result(eid, pain(5, 3));

    const Enrollment e = p.store->get_enrollment(eid);
    CHECK(e.results.size() == 3);
    const TimeSeries series = resolve_data_reference({"pain_diary", "pain", ValueKind::Numeric}, e);
    REQUIRE(series.points.size() == 2);
    CHECK(series.points[0].value == 6.0);
    CHECK(series.points[1].study_day == 3);
}

TEST_CASE("submissions after the last day finish the enrollment") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string eid = p.store->enroll(request(p.store->create_anonymous_user().user_id, study)).enrollment_id;
    p.go_to_day(28);
    p.store->record_task_result(eid, pain(2));
    p.go_to_day(29);
    CHECK(capture_error([&] { p.store->record_task_result(eid, pain(2, 28)); }).code() == ErrorCode::DuplicateResult);
    CHECK(capture_error([&] { p.store->record_task_result(eid, pain(2)); }).code() ==
          ErrorCode::EnrollmentNotActive);
    CHECK(p.store->get_enrollment(eid).status == EnrollmentStatus::Finished);
    CHECK(capture_error([&] { p.store->record_task_result(eid, pain(2, 28)); }).code() ==
          ErrorCode::EnrollmentNotActive);
}

TEST_CASE("opting out deletes the unfinished enrollment") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string user = p.store->create_anonymous_user().user_id;
    const std::string eid = p.store->enroll(request(user, study)).enrollment_id;
    p.store->record_task_result(eid, pain(4));

    p.store->opt_out(eid);
    CHECK(capture_error([&] { p.store->get_enrollment(eid); }).code() == ErrorCode::NotFound);
    CHECK(p.kv->scan("result/" + eid).empty());
    CHECK_FALSE(p.kv->get("snapshot/" + eid).has_value());
    CHECK(p.store->enrollments_of_user(user).empty());
    CHECK(p.store->enrollments_of_study(study).empty());
    CHECK(p.store->find_user(user).has_value());
    CHECK(capture_error([&] { p.store->opt_out(eid); }).code() == ErrorCode::EnrollmentNotActive);

    const std::string finished = p.store->enroll(request(user, study)).enrollment_id;
    p.store->record_task_result(finished, pain(4));
    p.store->finish_enrollment(finished);
    CHECK(capture_error([&] { p.store->opt_out(finished); }).code() == ErrorCode::EnrollmentNotActive);
    CHECK(p.store->get_enrollment(finished).results.size() == 1);
}

TEST_CASE("deleting a user keeps finished data under a tombstone") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string user = p.store->create_anonymous_user().user_id;
    const std::string finished = p.store->enroll(request(user, study)).enrollment_id;
    p.store->record_task_result(finished, pain(4));
    p.store->finish_enrollment(finished);
    const std::string active = p.store->enroll(request(user, study)).enrollment_id;
    p.store->record_task_result(active, pain(5));

    p.store->delete_user(user);
    CHECK_FALSE(p.store->find_user(user).has_value());
    CHECK(capture_error([&] { p.store->get_enrollment(active); }).code() == ErrorCode::NotFound);
    CHECK(p.kv->scan("result/" + active).empty());
    const Enrollment kept = p.store->get_enrollment(finished);
    CHECK(kept.user_id == kDeletedUser);
    CHECK(kept.status == EnrollmentStatus::Finished);
    CHECK(kept.results.size() == 1);
    CHECK(p.store->enrollments_of_user(user).empty());
    CHECK(p.store->enrollments_of_study(study) == std::vector<std::string>{finished});
    for (const auto& [key, value] : p.kv->scan("")) CHECK(value.find(user) == std::string::npos);

    CHECK(capture_error([&] { p.store->delete_user(user); }).code() == ErrorCode::UserUnknown);
    const std::string fresh = p.store->create_anonymous_user().user_id;
    p.store->delete_user(fresh);
    CHECK_FALSE(p.store->find_user(fresh).has_value());
}

TEST_CASE("enrollment snapshots are isolated from later study edits") {
    Platform p;
    Study s = back_pain();
    s.metadata.study_id = "isolated";
    const std::string study = p.publish(s);
    const std::string eid = p.store->enroll(request(p.store->create_anonymous_user().user_id, study)).enrollment_id;
    for (int day = 1; day <= 5; ++day) {
        p.go_to_day(day);
        p.store->record_task_result(eid, pain(day));
        p.store->record_task_result(eid, done("drink_tea"));
    }
    const Enrollment before = p.store->get_enrollment(eid);
    const json schedule_before = p.store->schedule(eid);
    const std::string report_before = encode_report_bundle(p.store->report(eid, true)).dump();

    // Rewrite the stored study behind the store's back.
    Study edited = s;
    edited.details.schedule.phase_duration_days = 2;
    edited.details.observations[0].task.questions[0].slider->maximum = 100;
    edited.details.interventions.interventions[0].tasks.clear();
    edited.details.minimum_study_length_days = 1;
    WriteBatch overwrite;
    overwrite.put("study/isolated", json{{"revision", 9}, {"published", false}, {"document", encode_study(edited)}}.dump());
    p.kv->commit(overwrite);

    const Enrollment after = p.store->get_enrollment(eid);
    CHECK(*after.snapshot == *before.snapshot);
    CHECK(after.phase_sequence == before.phase_sequence);
    CHECK(p.store->schedule(eid) == schedule_before);
    CHECK(encode_report_bundle(p.store->report(eid, true)).dump() == report_before);
}

TEST_CASE("csv fields are quoted per RFC 4180") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_field("") == "");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(7.0) == "7");
    CHECK(format_number(-2.5) == "-2.5");
}

TEST_CASE("csv export") {
    Platform p;
    const std::string study = p.publish(back_pain());
    const std::string header =
        "participant_id,enrollment_day,study_day,phase_index,active_intervention,task_id,property_id,"
        "pain_intensity,tea_taken,balm_applied,pad_used\r\n";
    CHECK(p.store->export_csv(study) == header);

    Study draft = back_pain();
    draft.metadata.study_id = "draft";
    p.store->save_draft(draft, 0);
    CHECK(capture_error([&] { p.store->export_csv("draft"); }).code() == ErrorCode::StudyNotPublished);
    CHECK(capture_error([&] { p.store->export_csv("missing"); }).code() == ErrorCode::NotFound);

    const std::string eid = p.store->enroll(request(p.store->create_anonymous_user().user_id, study)).enrollment_id;
    p.store->record_task_result(eid, pain(6));
    p.store->record_task_result(eid, done("drink_tea"));
    p.go_to_day(8);
    p.store->record_task_result(eid, pain(3));
    const std::string csv = p.store->export_csv(study);
    CHECK(csv == testsupport::read_text(testsupport::data_path("three_results.csv")));
    CHECK(csv.find(eid) != std::string::npos);
    CHECK(p.store->export_csv(study) == csv);
}

TEST_CASE("csv export quotes values containing commas") {
    Platform p;
    Study s = back_pain();
    s.details.interventions.interventions[0].intervention_id = "tea, hot";
    const std::string study = p.publish(s);
    EnrollRequest r = request(p.store->create_anonymous_user().user_id, study);
    r.selections = {"tea, hot", kBalm};
    const std::string eid = p.store->enroll(r).enrollment_id;
    p.store->record_task_result(eid, pain(1));
    const std::string csv = p.store->export_csv(study);
    CHECK(csv.find(",\"tea, hot\",pain_diary,pain,1,,,\r\n") != std::string::npos);
}

TEST_CASE("csv export can carry the user pseudonym") {
    Platform p(StoreOptions{true});
    const std::string study = p.publish(back_pain());
    const std::string user = p.store->create_anonymous_user().user_id;
    const std::string eid = p.store->enroll(request(user, study)).enrollment_id;
    p.store->record_task_result(eid, pain(1));
    const std::string csv = p.store->export_csv(study);
    CHECK(csv.find(user) != std::string::npos);
    CHECK(csv.find(eid) == std::string::npos);
}

TEST_CASE("simulated fixture export matches the golden file") {
    SimulationParams params;
    params.participants = 3;
    params.seed = 7;
    params.effect = 2.0;
    params.adherence = 0.9;
    std::string first;
    for (int run = 0; run < 2; ++run) {
        LocalPlatform platform = make_local_platform(back_pain(), params.seed, params.start);
        InProcessTransport transport(platform.store, platform.clock, platform.study_id, true);
        run_simulation(transport, params);
        const std::string csv = platform.store->export_csv(platform.study_id);
        if (run == 0) first = csv;
        CHECK(csv == first);
    }
    CHECK(first == testsupport::read_text(testsupport::data_path("back_pain_export.csv")));
}

TEST_CASE("stored records hold no personal data") {
    Platform p;
    const std::string study = p.publish(back_pain());
    for (int i = 0; i < 3; ++i) {
        const std::string eid = p.store->enroll(request(p.store->create_anonymous_user().user_id, study)).enrollment_id;
        p.store->record_task_result(eid, pain(i));
    }
    const std::set<std::string> header_keys{"consentGivenAt", "eligibilityAnswers", "id",        "phaseSequence",
                                            "selections",     "startedOn",          "status",    "studyId",
                                            "studyRevision",  "userId",             "utcOffsetMinutes"};
    int users = 0, enrollments = 0;
    for (const auto& [key, value] : p.kv->scan("")) {
        const json doc = json::parse(value, nullptr, false);
        if (key.rfind("user/", 0) == 0) {
            ++users;
            CHECK(doc.size() == 3);
        } else if (key.rfind("enrollment/", 0) == 0) {
            ++enrollments;
            std::set<std::string> keys;
            for (auto it = doc.begin(); it != doc.end(); ++it) keys.insert(it.key());
            CHECK(keys == header_keys);
        } else if (key.rfind("result/", 0) == 0) {
            CHECK(doc.size() == 5);
        } else {
            const bool known = key.rfind("study/", 0) == 0 || key.rfind("snapshot/", 0) == 0 || key.rfind("index/", 0) == 0;
            CHECK_MESSAGE(known, key);
        }
    }
    CHECK(users == 3);
    CHECK(enrollments == 3);
}
