#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace studyu {

/// Puts and erases applied together or not at all.
class WriteBatch {
public:
    void put(std::string key, std::string value) { ops_.emplace_back(std::move(key), std::move(value)); }
    void erase(std::string key) { ops_.emplace_back(std::move(key), std::nullopt); }

    const std::vector<std::pair<std::string, std::optional<std::string>>>& ops() const { return ops_; }
    bool empty() const { return ops_.empty(); }

private:
    std::vector<std::pair<std::string, std::optional<std::string>>> ops_;
};

/// Ordered key-value storage. Implementations are safe for concurrent use;
/// every read observes whole batches only.
class KvStore {
public:
    virtual ~KvStore() = default;

    virtual std::optional<std::string> get(const std::string& key) const = 0;
    /// Entries whose key starts with `prefix`, in key order.
    virtual std::vector<std::pair<std::string, std::string>> scan(const std::string& prefix) const = 0;
    virtual void commit(const WriteBatch& batch) = 0;
};

class MemoryKv : public KvStore {
public:
    std::optional<std::string> get(const std::string& key) const override;
    std::vector<std::pair<std::string, std::string>> scan(const std::string& prefix) const override;
    void commit(const WriteBatch& batch) override;

protected:
    void apply_locked(const WriteBatch& batch);

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::string> data_;
};

struct WalOptions {
    bool sync = false;                            // fdatasync after every commit
    std::uint64_t checkpoint_bytes = 8u << 20;  // WAL size that triggers a snapshot
};

/// MemoryKv made durable by a write-ahead log in `dir`.
///
/// wal.log holds one record per committed batch, framed as
/// [u32 length][u32 crc32][payload]; snapshot.db holds one record per key.
/// Opening replays the snapshot then the log and truncates a torn tail.
/// All failures surface as StorageUnavailable.
class WalKv final : public MemoryKv {
public:
    explicit WalKv(std::filesystem::path dir, WalOptions options = {});
    ~WalKv() override;

    void commit(const WriteBatch& batch) override;

    /// Writes the full state to a fresh snapshot and empties the log.
    void checkpoint();

    std::uint64_t wal_bytes() const;

private:
    void recover();
    void checkpoint_locked();
    void append_record(const std::string& payload);

    std::filesystem::path dir_;
    WalOptions options_;
    int wal_fd_ = -1;
    std::uint64_t wal_size_ = 0;
};

/// Framing shared by the log and the snapshot.
std::string frame_record(const std::string& payload);
std::string encode_batch(const WriteBatch& batch);
WriteBatch decode_batch(const std::string& payload);

} // namespace studyu
