#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "studyu/api_client.hpp"
#include "studyu/time.hpp"
#include "studyu/trial_store.hpp"

namespace studyu {

struct SimulationParams {
    int participants = 1;
    std::uint64_t seed = 1;
    double effect = 0.0;    // added to the outcome while B is active
    double noise_sd = 1.0;
    double adherence = 1.0;  // probability of completing each scheduled task
    std::optional<double> baseline_level;  // slider midpoint when absent
    double trend = 0.0;  // added per study day
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}};
};

/// Throws BadRequest for non-finite values or adherence outside [0, 1].
void check_params(const SimulationParams& params);

/// The participant-side operations a simulation needs.
class SimTransport {
public:
    virtual ~SimTransport() = default;
    virtual const Study& study() const = 0;
    virtual std::string create_user() = 0;
    virtual nlohmann::json enroll(const EnrollRequest& request) = 0;  // enrollment header
    virtual void submit(const std::string& enrollment_id, const SubmitResult& result) = 0;
    virtual nlohmann::json report(const std::string& enrollment_id) = 0;
    virtual void set_time(Timestamp now) = 0;
};

/// Calls the store directly.
class InProcessTransport final : public SimTransport {
public:
    InProcessTransport(std::shared_ptr<TrialStore> store, std::shared_ptr<ManualClock> clock,
                       const std::string& study_id, bool demo_unlock = true);

    const Study& study() const override { return study_; }
    std::string create_user() override;
    nlohmann::json enroll(const EnrollRequest& request) override;
    void submit(const std::string& enrollment_id, const SubmitResult& result) override;
    nlohmann::json report(const std::string& enrollment_id) override;
    void set_time(Timestamp now) override;

private:
    std::shared_ptr<TrialStore> store_;
    std::shared_ptr<ManualClock> clock_;
    Study study_;
    bool demo_unlock_;
};

/// Talks to a running server. Needs the researcher token (pinned seeds, clock).
class HttpTransport final : public SimTransport {
public:
    HttpTransport(const std::string& base_url, const std::string& token, const std::string& study_id);

    const Study& study() const override { return study_; }
    std::string create_user() override;
    nlohmann::json enroll(const EnrollRequest& request) override;
    void submit(const std::string& enrollment_id, const SubmitResult& result) override;
    nlohmann::json report(const std::string& enrollment_id) override;
    void set_time(Timestamp now) override;

private:
    ApiClient client_;
    Study study_;
};

struct ParticipantOutcome {
    int index = 0;  // 1-based
    std::optional<std::string> error_code;
    std::string error_message;
    bool assessable = false;
    bool significant = false;
    std::optional<double> z;
    std::optional<double> contrast;
    std::optional<std::string> favored;
};

struct SimulationSummary {
    std::vector<ParticipantOutcome> participants;
    int significant = 0;
    int assessable = 0;
    int errors = 0;

    double significant_fraction() const;
};

/// Enrolls `participants` seeded participants one after another, walks every
/// study day and reads each primary report section. Per-participant failures
/// are recorded, never thrown. Fully determined by the study and `params`.
SimulationSummary run_simulation(SimTransport& transport, const SimulationParams& params);

/// One line per participant plus the aggregate line.
std::string format_summary(const SimulationSummary& summary);
nlohmann::json encode_summary(const SimulationSummary& summary);

/// A memory store with a seeded id source and a manual clock, holding
/// `study` published. Used by the in-process simulator and tests.
struct LocalPlatform {
    std::shared_ptr<ManualClock> clock;
    std::shared_ptr<TrialStore> store;
    std::string study_id;
};
LocalPlatform make_local_platform(const Study& study, std::uint64_t id_seed, Timestamp start);

} // namespace studyu
