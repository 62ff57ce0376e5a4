#include "studyu/ids.hpp"

#include <sys/random.h>

#include <cerrno>
#include <cstring>

#include "studyu/error.hpp"

namespace studyu {

namespace {

void fill_random(void* out, std::size_t size) {
    auto* p = static_cast<unsigned char*>(out);
    while (size > 0) {
        const ssize_t n = ::getrandom(p, size, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::StorageUnavailable, std::string("getrandom: ") + std::strerror(errno));
        }
        p += n;
        size -= static_cast<std::size_t>(n);
    }
}

} // namespace

std::string format_uuid_v4(unsigned char bytes[16]) {
    bytes[6] = static_cast<unsigned char>((bytes[6] & 0x0f) | 0x40);
    bytes[8] = static_cast<unsigned char>((bytes[8] & 0x3f) | 0x80);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(hex[bytes[i] >> 4]);
        out.push_back(hex[bytes[i] & 0x0f]);
    }
    return out;
}

bool is_uuid_v4(std::string_view text) {
    if (text.size() != 36) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (c != '-') return false;
        } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return text[14] == '4' && (text[19] == '8' || text[19] == '9' || text[19] == 'a' || text[19] == 'b');
}

std::string SecureIdGenerator::next_uuid() {
    unsigned char bytes[16];
    fill_random(bytes, sizeof bytes);
    return format_uuid_v4(bytes);
}

std::uint64_t SecureIdGenerator::next_seed() {
    std::uint64_t seed = 0;
    fill_random(&seed, sizeof seed);
    return seed;
}

std::string SeededIdGenerator::next_uuid() {
    std::lock_guard lock(mutex_);
    unsigned char bytes[16];
    for (int half = 0; half < 2; ++half) {
        std::uint64_t v = rng_.next();
        for (int i = 0; i < 8; ++i) bytes[half * 8 + i] = static_cast<unsigned char>(v >> (8 * i));
    }
    return format_uuid_v4(bytes);
}

std::uint64_t SeededIdGenerator::next_seed() {
    std::lock_guard lock(mutex_);
    return rng_.next();
}

} // namespace studyu
