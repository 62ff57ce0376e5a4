#include "studyu/api_client.hpp"

#include <httplib.h>

#include "studyu/error.hpp"

namespace studyu {

using nlohmann::json;

struct ApiClient::Impl {
    httplib::Client http;
    std::string token;

    Impl(const std::string& base_url, std::string t) : http(base_url), token(std::move(t)) {
        http.set_connection_timeout(5);
        http.set_read_timeout(60);
        http.set_keep_alive(true);
    }

    httplib::Headers headers() const {
        if (token.empty()) return {};
        return {{"Authorization", "Bearer " + token}};
    }

    static const httplib::Response& check(const httplib::Result& result) {
        if (!result) {
            throw TransportError("server unreachable: " + httplib::to_string(result.error()));
        }
        const httplib::Response& res = *result;
        if (res.status >= 200 && res.status < 300) return res;
        json body = json::parse(res.body, nullptr, false);
        if (body.is_object() && body.contains("code") && body["code"].is_string()) {
            const std::string name = body["code"].get<std::string>();
            const std::string message = body.value("message", name);
            throw Error(error_from_name(name).value_or(ErrorCode::BadRequest), message,
                        body.contains("details") ? body["details"] : json());
        }
        throw TransportError("unexpected HTTP " + std::to_string(res.status) + " response");
    }

    static json parse(const httplib::Response& res) {
        if (res.body.empty()) return nullptr;
        return json::parse(res.body);
    }
};

ApiClient::ApiClient(const std::string& base_url, std::string token)
    : impl_(std::make_unique<Impl>(base_url, std::move(token))) {}

ApiClient::~ApiClient() = default;

json ApiClient::get(const std::string& path) {
    return Impl::parse(Impl::check(impl_->http.Get(path, impl_->headers())));
}

json ApiClient::post(const std::string& path, const json& body) {
    return Impl::parse(Impl::check(impl_->http.Post(path, impl_->headers(), body.dump(), "application/json")));
}

json ApiClient::put(const std::string& path, const json& body) {
    return Impl::parse(Impl::check(impl_->http.Put(path, impl_->headers(), body.dump(), "application/json")));
}

void ApiClient::del(const std::string& path) { Impl::check(impl_->http.Delete(path, impl_->headers())); }

std::string ApiClient::get_text(const std::string& path) {
    return Impl::check(impl_->http.Get(path, impl_->headers())).body;
}

std::string publish_via_api(ApiClient& client, const json& study_document) {
    const json saved = client.post("/api/v1/designer/studies", {{"study", study_document}, {"expectedRevision", 0}});
    const std::string id = saved.at("id").get<std::string>();
    client.post("/api/v1/designer/studies/" + id + "/publish", {{"expectedRevision", saved.at("revision")}});
    return id;
}

} // namespace studyu
