#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace studyu {

/// The server could not be reached or answered with something other than JSON.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Minimal JSON client for the REST API. Error responses are rethrown as
/// studyu::Error carrying the server's code, message and details.
class ApiClient {
public:
    /// `base_url` like "http://127.0.0.1:8080".
    ApiClient(const std::string& base_url, std::string token = {});
    ~ApiClient();

    nlohmann::json get(const std::string& path);
    nlohmann::json post(const std::string& path, const nlohmann::json& body);
    nlohmann::json put(const std::string& path, const nlohmann::json& body);
    void del(const std::string& path);
    /// Raw body of a successful GET.
    std::string get_text(const std::string& path);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Saves `study_document` as a new draft and publishes it; returns the id.
std::string publish_via_api(ApiClient& client, const nlohmann::json& study_document);

} // namespace studyu
