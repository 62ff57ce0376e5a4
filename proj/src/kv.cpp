#include "studyu/kv.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <zlib.h>

#include "studyu/error.hpp"

namespace studyu {

namespace fs = std::filesystem;

namespace {

constexpr const char* kWalFile = "wal.log";
constexpr const char* kSnapshotFile = "snapshot.db";
constexpr const char* kSnapshotTemp = "snapshot.db.tmp";
constexpr std::uint32_t kMaxRecord = 1u << 30;

[[noreturn]] void io_failure(const std::string& what) {
    throw Error(ErrorCode::StorageUnavailable, what + ": " + std::strerror(errno));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}

std::uint32_t checksum(const std::string& payload) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

bool read_string(const std::string& in, std::size_t& pos, std::string& out) {
    if (pos + 4 > in.size()) return false;
    const std::uint32_t len = get_u32(in.data() + pos);
    pos += 4;
    if (pos + len > in.size()) return false;
    out.assign(in, pos, len);
    pos += len;
    return true;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Splits `bytes` into valid records; returns the offset just past the last one.
std::size_t read_records(const std::string& bytes, std::vector<std::string>& records) {
    std::size_t pos = 0;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = get_u32(bytes.data() + pos);
        const std::uint32_t crc = get_u32(bytes.data() + pos + 4);
        if (len > kMaxRecord || pos + 8 + len > bytes.size()) break;
        std::string payload = bytes.substr(pos + 8, len);
        if (checksum(payload) != crc) break;
        records.push_back(std::move(payload));
        pos += 8 + len;
    }
    return pos;
}

void write_all(int fd, const std::string& bytes, const char* what) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_failure(what);
        }
        done += static_cast<std::size_t>(n);
    }
}

} // namespace

std::string frame_record(const std::string& payload) {
    std::string out;
    out.reserve(payload.size() + 8);
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    put_u32(out, checksum(payload));
    out += payload;
    return out;
}

std::string encode_batch(const WriteBatch& batch) {
    std::string out;
    for (const auto& [key, value] : batch.ops()) {
        out.push_back(value ? 'P' : 'D');
        put_string(out, key);
        if (value) put_string(out, *value);
    }
    return out;
}

WriteBatch decode_batch(const std::string& payload) {
    WriteBatch batch;
    std::size_t pos = 0;
    while (pos < payload.size()) {
        const char op = payload[pos++];
        std::string key, value;
        if (!read_string(payload, pos, key)) throw Error(ErrorCode::StorageUnavailable, "corrupt batch record");
        if (op == 'P') {
            if (!read_string(payload, pos, value)) throw Error(ErrorCode::StorageUnavailable, "corrupt batch record");
            batch.put(std::move(key), std::move(value));
        } else if (op == 'D') {
            batch.erase(std::move(key));
        } else {
            throw Error(ErrorCode::StorageUnavailable, "corrupt batch record");
        }
    }
    return batch;
}

// MemoryKv

std::optional<std::string> MemoryKv::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = data_.find(key);
    if (it == data_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<std::string, std::string>> MemoryKv::scan(const std::string& prefix) const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<std::string, std::string>> out;
    for (auto it = data_.lower_bound(prefix); it != data_.end() && it->first.starts_with(prefix); ++it) {
        out.emplace_back(it->first, it->second);
    }
    return out;
}

void MemoryKv::commit(const WriteBatch& batch) {
    std::unique_lock lock(mutex_);
    apply_locked(batch);
}

void MemoryKv::apply_locked(const WriteBatch& batch) {
    for (const auto& [key, value] : batch.ops()) {
        if (value) {
            data_[key] = *value;
        } else {
            data_.erase(key);
        }
    }
}

// WalKv

WalKv::WalKv(fs::path dir, WalOptions options) : dir_(std::move(dir)), options_(options) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::StorageUnavailable, "cannot create " + dir_.string() + ": " + ec.message());
    recover();
}

WalKv::~WalKv() {
    if (wal_fd_ >= 0) ::close(wal_fd_);
}

void WalKv::recover() {
    std::vector<std::string> records;
    const std::string snapshot = read_file(dir_ / kSnapshotFile);
    const std::size_t snapshot_valid = read_records(snapshot, records);
    if (snapshot_valid != snapshot.size()) {
        throw Error(ErrorCode::StorageUnavailable, "snapshot " + (dir_ / kSnapshotFile).string() + " is corrupt");
    }
    for (const std::string& r : records) apply_locked(decode_batch(r));

    records.clear();
    const fs::path wal = dir_ / kWalFile;
    const std::string log = read_file(wal);
    const std::size_t valid = read_records(log, records);
    for (const std::string& r : records) apply_locked(decode_batch(r));

    wal_fd_ = ::open(wal.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
    if (wal_fd_ < 0) io_failure("open " + wal.string());
    if (valid != log.size() && ::ftruncate(wal_fd_, static_cast<off_t>(valid)) != 0) io_failure("truncate wal");
    if (::lseek(wal_fd_, static_cast<off_t>(valid), SEEK_SET) < 0) io_failure("seek wal");
    wal_size_ = valid;
    std::error_code ec;
    fs::remove(dir_ / kSnapshotTemp, ec);
}

void WalKv::append_record(const std::string& payload) {
    const std::string record = frame_record(payload);
    write_all(wal_fd_, record, "append wal");
    if (options_.sync && ::fdatasync(wal_fd_) != 0) io_failure("sync wal");
    wal_size_ += record.size();
}

void WalKv::commit(const WriteBatch& batch) {
    if (batch.empty()) return;
    std::unique_lock lock(mutex_);
    append_record(encode_batch(batch));
    apply_locked(batch);
    if (wal_size_ >= options_.checkpoint_bytes) checkpoint_locked();
}

void WalKv::checkpoint() {
    std::unique_lock lock(mutex_);
    checkpoint_locked();
}

void WalKv::checkpoint_locked() {
    const fs::path tmp = dir_ / kSnapshotTemp;
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_failure("open " + tmp.string());
    std::string buffer;
    for (const auto& [key, value] : data_) {
        WriteBatch one;
        one.put(key, value);
        buffer += frame_record(encode_batch(one));
        if (buffer.size() > (1u << 20)) {
            write_all(fd, buffer, "write snapshot");
            buffer.clear();
        }
    }
    write_all(fd, buffer, "write snapshot");
    if (::fsync(fd) != 0) {
        ::close(fd);
        io_failure("sync snapshot");
    }
    ::close(fd);
    std::error_code ec;
    fs::rename(tmp, dir_ / kSnapshotFile, ec);
    if (ec) throw Error(ErrorCode::StorageUnavailable, "install snapshot: " + ec.message());
    if (::ftruncate(wal_fd_, 0) != 0) io_failure("truncate wal");
    if (::lseek(wal_fd_, 0, SEEK_SET) < 0) io_failure("seek wal");
    wal_size_ = 0;
}

std::uint64_t WalKv::wal_bytes() const {
    std::shared_lock lock(mutex_);
    return wal_size_;
}

} // namespace studyu
