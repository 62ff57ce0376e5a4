#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "studyu/error.hpp"

namespace studyu {

struct ApiError {
    int status = 500;
    std::string code;  // error_name of the originating ErrorCode
    std::string message;
    nlohmann::json details;  // null when absent

    /// {"code", "message"} plus "details" when present.
    nlohmann::json body() const;
};

int http_status(ErrorCode code);

ApiError map_error(const Error& error);

} // namespace studyu
