#pragma once

#include <memory>
#include <optional>
#include <string>

#include "studyu/time.hpp"
#include "studyu/trial_store.hpp"

namespace studyu {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::string data_dir;  // empty keeps everything in memory
    std::string researcher_token;  // empty disables researcher endpoints
    bool demo_unlock_reports = false;
    bool include_user_pseudonym = false;
    bool wal_sync = false;
    /// Starts a manual clock at this instant and enables POST /api/v1/admin/clock.
    std::optional<Timestamp> manual_clock_start;

    /// STUDYU_BIND (host:port), STUDYU_DATA_DIR, STUDYU_RESEARCHER_TOKEN,
    /// STUDYU_DEMO_UNLOCK_REPORTS, STUDYU_EXPORT_INCLUDE_USER_PSEUDONYM,
    /// STUDYU_WAL_SYNC, STUDYU_MANUAL_CLOCK. Throws BadRequest on bad values.
    static ServiceConfig from_env();
};

bool parse_flag(std::string_view text, bool& out);

/// Store, clock and id source as configured. A data directory selects the
/// write-ahead-logged store. `manual_clock` receives the manual clock if one
/// was configured.
std::shared_ptr<TrialStore> open_store(const ServiceConfig& config, std::shared_ptr<ManualClock>* manual_clock = nullptr);

/// REST facade over a TrialStore.
class ApiService {
public:
    ApiService(std::shared_ptr<TrialStore> store, ServiceConfig config,
               std::shared_ptr<ManualClock> admin_clock = nullptr);
    ~ApiService();

    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    /// Throws BindFailure.
    int start();
    /// Blocks until stop() is called from elsewhere.
    void wait();
    /// Stops accepting; in-flight requests complete first.
    void stop();

    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace studyu
