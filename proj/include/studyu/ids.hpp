#pragma once

#include <cstdint>
#include <mutex>
#include <string>

#include "studyu/schedule.hpp"

namespace studyu {

/// Source of opaque identifiers and server-drawn seeds.
class IdGenerator {
public:
    virtual ~IdGenerator() = default;
    /// Lowercase hyphenated UUID v4.
    virtual std::string next_uuid() = 0;
    virtual std::uint64_t next_seed() = 0;
};

/// Kernel CSPRNG (getrandom).
class SecureIdGenerator final : public IdGenerator {
public:
    std::string next_uuid() override;
    std::uint64_t next_seed() override;
};

/// Reproducible ids for tests and simulations.
class SeededIdGenerator final : public IdGenerator {
public:
    explicit SeededIdGenerator(std::uint64_t seed) : rng_(seed) {}
    std::string next_uuid() override;
    std::uint64_t next_seed() override;

private:
    std::mutex mutex_;
    SplitMix64 rng_;
};

/// Formats 16 bytes as a UUID, forcing version 4 and the RFC 4122 variant.
std::string format_uuid_v4(unsigned char bytes[16]);

bool is_uuid_v4(std::string_view text);

} // namespace studyu
