#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "studyu/analysis.hpp"
#include "studyu/enrollment.hpp"
#include "studyu/ids.hpp"
#include "studyu/kv.hpp"
#include "studyu/study_model.hpp"
#include "studyu/time.hpp"

namespace studyu {

/// Marker written over the user id of retained enrollments of deleted users.
inline constexpr std::string_view kDeletedUser = "deleted-user";

struct StoreOptions {
    /// CSV participant column carries the user id instead of the enrollment id.
    bool export_include_user_pseudonym = false;
};

struct AnonymousUser {
    std::string user_id;
    Timestamp created_at{};
    Timestamp terms_accepted_at{};
};

nlohmann::json encode_user(const AnonymousUser& user);

struct SaveOutcome {
    std::string study_id;
    std::int64_t revision = 0;
};

struct EnrollRequest {
    std::string user_id;
    std::string study_id;
    std::vector<std::string> selections;
    std::vector<Answer> eligibility_answers;
    bool consent = false;
    std::optional<std::uint64_t> seed;
    int utc_offset_minutes = 0;
};

struct SubmitResult {
    std::string task_id;
    std::optional<int> study_day;  // defaults to the current study day
    ResultPayload payload;
};

/// Persistent state of the platform: studies (drafts and published),
/// anonymous users, enrollments and their results.
///
/// Writes are serialized per study and per enrollment; operations on
/// unrelated entities proceed concurrently. Every method is thread-safe.
class TrialStore {
public:
    TrialStore(std::shared_ptr<KvStore> kv, std::shared_ptr<IdGenerator> ids, std::shared_ptr<const Clock> clock,
               StoreOptions options = {});

    // Studies

    /// Optimistic single-writer save. A new study is created when
    /// `expected_revision` is 0 (an empty study id is then generated).
    /// Throws RevisionConflict or AlreadyPublished.
    SaveOutcome save_draft(Study study, std::int64_t expected_revision);

    /// Validates with the publish gate and freezes the study. Throws
    /// NotFound, AlreadyPublished, RevisionConflict, ValidationFailed.
    void publish(const std::string& study_id, std::int64_t expected_revision);

    /// Drafts only. Throws NotFound or AlreadyPublished.
    void delete_draft(const std::string& study_id);

    Study get_study(const std::string& study_id) const;   // any state; NotFound
    Study get_published(const std::string& study_id) const;  // NotFound unless published
    std::vector<Study> list_studies() const;               // by id
    std::vector<Study> list_published() const;

    // Participants

    AnonymousUser create_anonymous_user();
    std::optional<AnonymousUser> find_user(const std::string& user_id) const;

    /// Throws UserUnknown, NotFound, StudyNotPublished, TooManyInterventions,
    /// TooFewInterventions, UnknownIntervention, SameIntervention,
    /// IncompleteQuestionnaire, InvalidAnswer, NotEligible, ConsentRequired.
    Enrollment enroll(const EnrollRequest& request);

    /// Throws NotFound, EnrollmentNotActive, UnscheduledTask, LateSubmission,
    /// PayloadMismatch, InvalidAnswer, IncompleteQuestionnaire, DuplicateResult.
    TaskResult record_task_result(const std::string& enrollment_id, const SubmitResult& submission);

    void finish_enrollment(const std::string& enrollment_id);
    /// Deletes an active enrollment with all its results.
    void opt_out(const std::string& enrollment_id);
    /// Deletes the user and their active enrollments; finished ones are kept
    /// under kDeletedUser. Throws UserUnknown.
    void delete_user(const std::string& user_id);

    Enrollment get_enrollment(const std::string& enrollment_id) const;  // NotFound
    std::vector<std::string> enrollments_of_user(const std::string& user_id) const;
    std::vector<std::string> enrollments_of_study(const std::string& study_id) const;

    ReportBundle report(const std::string& enrollment_id, bool demo_unlock) const;
    nlohmann::json schedule(const std::string& enrollment_id) const;

    /// Throws NotFound or StudyNotPublished.
    std::string export_csv(const std::string& study_id) const;

    const Clock& clock() const { return *clock_; }
    KvStore& kv() { return *kv_; }

private:
    struct StudyRecord {
        Study study;
        bool published = false;
        std::int64_t revision = 0;
    };

    std::optional<StudyRecord> load_study(const std::string& study_id) const;
    Enrollment load_enrollment(const std::string& enrollment_id) const;
    std::shared_ptr<const Study> load_snapshot(const std::string& enrollment_id) const;
    bool past_last_day(const Enrollment& e, int slack_days) const;
    void erase_enrollment(const Enrollment& e, WriteBatch& batch) const;
    std::recursive_mutex& stripe(std::string_view key) const;

    std::shared_ptr<KvStore> kv_;
    std::shared_ptr<IdGenerator> ids_;
    std::shared_ptr<const Clock> clock_;
    StoreOptions options_;

    mutable std::array<std::recursive_mutex, 64> stripes_;
    mutable std::mutex snapshot_cache_mutex_;
    mutable std::unordered_map<std::string, std::shared_ptr<const Study>> snapshot_cache_;
};

/// One RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view value);

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

} // namespace studyu
