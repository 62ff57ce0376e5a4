#include "studyu/api_service.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "studyu/error_map.hpp"
#include "studyu/study_json.hpp"

namespace studyu {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? v : nullptr;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return body;
}

const json& member(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end()) throw Error(ErrorCode::BadRequest, std::string("missing member \"") + key + "\"");
    return *it;
}

std::string string_member(const json& body, const char* key) {
    const json& v = member(body, key);
    if (!v.is_string()) throw Error(ErrorCode::BadRequest, std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::int64_t revision_member(const json& body) {
    const json& v = member(body, "expectedRevision");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw Error(ErrorCode::BadRequest, "\"expectedRevision\" must be a non-negative integer");
    }
    return v.get<std::int64_t>();
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

json metadata_summary(const Study& s) { return encode_metadata(s.metadata); }

} // namespace

bool parse_flag(std::string_view text, bool& out) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") {
        out = true;
        return true;
    }
    if (text == "0" || text == "false" || text == "no" || text == "off" || text.empty()) {
        out = false;
        return true;
    }
    return false;
}

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig c;
    if (const char* bind = env("STUDYU_BIND")) {
        const std::string text = bind;
        const auto colon = text.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::BadRequest, "STUDYU_BIND must be host:port");
        c.host = text.substr(0, colon);
        try {
            c.port = std::stoi(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadRequest, "STUDYU_BIND has an invalid port");
        }
        if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::BadRequest, "STUDYU_BIND has an invalid port");
    }
    if (const char* dir = env("STUDYU_DATA_DIR")) c.data_dir = dir;
    if (const char* token = env("STUDYU_RESEARCHER_TOKEN")) c.researcher_token = token;
    auto flag = [](const char* name, bool& out) {
        if (const char* v = env(name)) {
            if (!parse_flag(v, out)) throw Error(ErrorCode::BadRequest, std::string(name) + " must be a boolean");
        }
    };
    flag("STUDYU_DEMO_UNLOCK_REPORTS", c.demo_unlock_reports);
    flag("STUDYU_EXPORT_INCLUDE_USER_PSEUDONYM", c.include_user_pseudonym);
    flag("STUDYU_WAL_SYNC", c.wal_sync);
    if (const char* start = env("STUDYU_MANUAL_CLOCK")) {
        c.manual_clock_start = parse_timestamp(start);
        if (!c.manual_clock_start) throw Error(ErrorCode::BadRequest, "STUDYU_MANUAL_CLOCK must be YYYY-MM-DDTHH:MM:SSZ");
    }
    return c;
}

std::shared_ptr<TrialStore> open_store(const ServiceConfig& config, std::shared_ptr<ManualClock>* manual_clock) {
    std::shared_ptr<KvStore> kv;
    if (config.data_dir.empty()) {
        kv = std::make_shared<MemoryKv>();
    } else {
        kv = std::make_shared<WalKv>(config.data_dir, WalOptions{config.wal_sync});
    }
    std::shared_ptr<const Clock> clock;
    if (config.manual_clock_start) {
        auto manual = std::make_shared<ManualClock>(*config.manual_clock_start);
        if (manual_clock) *manual_clock = manual;
        clock = manual;
    } else {
        clock = std::make_shared<SystemClock>();
    }
    return std::make_shared<TrialStore>(std::move(kv), std::make_shared<SecureIdGenerator>(), std::move(clock),
                                        StoreOptions{config.include_user_pseudonym});
}

struct ApiService::Impl {
    std::shared_ptr<TrialStore> store;
    ServiceConfig config;
    std::shared_ptr<ManualClock> admin_clock;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    bool authorized(const httplib::Request& req) const {
        if (config.researcher_token.empty()) return false;
        const std::string header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (!header.starts_with(prefix)) return false;
        return constant_time_equal(std::string_view(header).substr(prefix.size()), config.researcher_token);
    }

    void require_researcher(const httplib::Request& req) const {
        if (!authorized(req)) throw Error(ErrorCode::Unauthorized, "a valid researcher token is required");
    }

    template <class Fn>
    httplib::Server::Handler wrap(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                const ApiError api = map_error(e);
                send_json(res, api.status, api.body());
            } catch (const json::exception& e) {
                send_json(res, 400, {{"code", "bad_request"}, {"message", e.what()}});
            } catch (const std::exception& e) {
                send_json(res, 500, {{"code", "internal"}, {"message", e.what()}});
            }
        };
    }

    SaveOutcome save(const httplib::Request& req, const std::optional<std::string>& path_id) {
        require_researcher(req);
        const json body = parse_body(req);
        Study study = decode_study(member(body, "study"));
        if (path_id) {
            if (!study.metadata.study_id.empty() && study.metadata.study_id != *path_id) {
                throw Error(ErrorCode::BadRequest, "study id in body differs from the path");
            }
            study.metadata.study_id = *path_id;
        }
        return store->save_draft(std::move(study), revision_member(body));
    }

    void install_routes() {
        auto& s = server;

        // Participant endpoints.
        s.Post("/api/v1/users", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const json& accept = member(body, "acceptTerms");
            if (!accept.is_boolean() || !accept.get<bool>()) {
                throw Error(ErrorCode::BadRequest, "the terms of use must be accepted");
            }
            send_json(res, 201, encode_user(store->create_anonymous_user()));
        }));
        s.Delete("/api/v1/users/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            store->delete_user(req.path_params.at("id"));
            res.status = 204;
        }));
        s.Get("/api/v1/studies", wrap([this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const Study& st : store->list_published()) list.push_back(metadata_summary(st));
            send_json(res, 200, list);
        }));
        s.Get("/api/v1/studies/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, encode_study(store->get_published(req.path_params.at("id"))));
        }));
        s.Post("/api/v1/enrollments", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            EnrollRequest r;
            r.user_id = string_member(body, "userId");
            r.study_id = string_member(body, "studyId");
            const json& selections = member(body, "selections");
            if (!selections.is_array()) throw Error(ErrorCode::BadRequest, "\"selections\" must be an array");
            for (const json& sel : selections) {
                if (!sel.is_string()) throw Error(ErrorCode::BadRequest, "selections must be intervention ids");
                r.selections.push_back(sel.get<std::string>());
            }
            if (auto it = body.find("answers"); it != body.end()) {
                if (!it->is_array()) throw Error(ErrorCode::BadRequest, "\"answers\" must be an array");
                for (std::size_t i = 0; i < it->size(); ++i) {
                    r.eligibility_answers.push_back(decode_answer((*it)[i], "$.answers[" + std::to_string(i) + "]"));
                }
            }
            const json& consent = member(body, "consent");
            if (!consent.is_boolean()) throw Error(ErrorCode::BadRequest, "\"consent\" must be a boolean");
            r.consent = consent.get<bool>();
            if (auto it = body.find("utcOffsetMinutes"); it != body.end()) {
                if (!it->is_number_integer() || std::abs(it->get<int>()) > 18 * 60) {
                    throw Error(ErrorCode::BadRequest, "\"utcOffsetMinutes\" must be an integer within +-1080");
                }
                r.utc_offset_minutes = it->get<int>();
            }
            if (auto it = body.find("seed"); it != body.end()) {
                require_researcher(req);
                if (!it->is_number_unsigned()) throw Error(ErrorCode::BadRequest, "\"seed\" must be an unsigned integer");
                r.seed = it->get<std::uint64_t>();
            }
            send_json(res, 201, encode_enrollment_header(store->enroll(r)));
        }));
        s.Get("/api/v1/enrollments/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const Enrollment e = store->get_enrollment(req.path_params.at("id"));
            json j = encode_enrollment_header(e);
            json results = json::array();
            for (const TaskResult& r : e.results) results.push_back(encode_task_result(r));
            j["results"] = std::move(results);
            send_json(res, 200, j);
        }));
        s.Post("/api/v1/enrollments/:id/results", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            SubmitResult r;
            r.task_id = string_member(body, "task");
            if (auto it = body.find("studyDay"); it != body.end()) {
                if (!it->is_number_integer()) throw Error(ErrorCode::BadRequest, "\"studyDay\" must be an integer");
                r.study_day = it->get<int>();
            }
            r.payload = decode_result_payload(member(body, "payload"), "$.payload");
            send_json(res, 201, encode_task_result(store->record_task_result(req.path_params.at("id"), r)));
        }));
        s.Get("/api/v1/enrollments/:id/report", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200,
                      encode_report_bundle(store->report(req.path_params.at("id"), config.demo_unlock_reports)));
        }));
        s.Get("/api/v1/enrollments/:id/schedule", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, store->schedule(req.path_params.at("id")));
        }));
        s.Post("/api/v1/enrollments/:id/opt-out", wrap([this](const httplib::Request& req, httplib::Response& res) {
            store->opt_out(req.path_params.at("id"));
            res.status = 204;
        }));
        s.Post("/api/v1/enrollments/:id/finish", wrap([this](const httplib::Request& req, httplib::Response& res) {
            store->finish_enrollment(req.path_params.at("id"));
            res.status = 204;
        }));

        // Researcher endpoints.
        s.Get("/api/v1/designer/studies", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            json list = json::array();
            for (const Study& st : store->list_studies()) list.push_back(metadata_summary(st));
            send_json(res, 200, list);
        }));
        s.Post("/api/v1/designer/studies", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const SaveOutcome out = save(req, std::nullopt);
            send_json(res, 201, {{"id", out.study_id}, {"revision", out.revision}});
        }));
        s.Put("/api/v1/designer/studies", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const SaveOutcome out = save(req, std::nullopt);
            send_json(res, 200, {{"id", out.study_id}, {"revision", out.revision}});
        }));
        s.Put("/api/v1/designer/studies/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const SaveOutcome out = save(req, req.path_params.at("id"));
            send_json(res, 200, {{"id", out.study_id}, {"revision", out.revision}});
        }));
        s.Get("/api/v1/designer/studies/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            send_json(res, 200, encode_study(store->get_study(req.path_params.at("id"))));
        }));
        s.Delete("/api/v1/designer/studies/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            store->delete_draft(req.path_params.at("id"));
            res.status = 204;
        }));
        s.Post("/api/v1/designer/studies/:id/publish", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            const json body = parse_body(req);
            const std::string id = req.path_params.at("id");
            store->publish(id, revision_member(body));
            send_json(res, 200, metadata_summary(store->get_study(id)));
        }));
        s.Get("/api/v1/designer/studies/:id/export.csv",
              wrap([this](const httplib::Request& req, httplib::Response& res) {
                  require_researcher(req);
                  res.status = 200;
                  res.set_content(store->export_csv(req.path_params.at("id")), "text/csv; charset=utf-8");
              }));

        s.Get("/api/v1/admin/clock", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            send_json(res, 200, {{"now", format_timestamp(store->clock().now())}, {"manual", admin_clock != nullptr}});
        }));
        s.Post("/api/v1/admin/clock", wrap([this](const httplib::Request& req, httplib::Response& res) {
            require_researcher(req);
            if (!admin_clock) throw Error(ErrorCode::NotFound, "the server clock is not adjustable");
            const json body = parse_body(req);
            auto now = parse_timestamp(string_member(body, "now"));
            if (!now) throw Error(ErrorCode::BadRequest, "\"now\" must be YYYY-MM-DDTHH:MM:SSZ");
            admin_clock->set(*now);
            send_json(res, 200, {{"now", format_timestamp(*now)}, {"manual", true}});
        }));

        s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                const char* code = res.status == 404 ? "not_found" : "bad_request";
                res.set_content(json{{"code", code}, {"message", httplib::status_message(res.status)}}.dump(), kJson);
            }
        });
    }
};

ApiService::ApiService(std::shared_ptr<TrialStore> store, ServiceConfig config,
                       std::shared_ptr<ManualClock> admin_clock)
    : impl_(std::make_unique<Impl>()) {
    impl_->store = std::move(store);
    impl_->config = std::move(config);
    impl_->admin_clock = std::move(admin_clock);
    impl_->install_routes();
}

ApiService::~ApiService() { stop(); }

int ApiService::start() {
    Impl& i = *impl_;
    if (i.config.port == 0) {
        i.port = i.server.bind_to_any_port(i.config.host);
        if (i.port < 0) throw Error(ErrorCode::BindFailure, "cannot bind " + i.config.host);
    } else {
        if (!i.server.bind_to_port(i.config.host, i.config.port)) {
            throw Error(ErrorCode::BindFailure,
                        "cannot bind " + i.config.host + ":" + std::to_string(i.config.port));
        }
        i.port = i.config.port;
    }
    i.thread = std::thread([&server = i.server] { server.listen_after_bind(); });
    i.server.wait_until_ready();
    return i.port;
}

void ApiService::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void ApiService::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiService::port() const { return impl_->port; }

} // namespace studyu
