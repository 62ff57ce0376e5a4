#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace studyu {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Minutes after local midnight, 0..1439.
struct TimeOfDay {
    int minutes = 0;

    friend auto operator<=>(const TimeOfDay&, const TimeOfDay&) = default;
};

/// "2024-03-01T08:30:00Z"
std::string format_timestamp(Timestamp ts);
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "2024-03-01"
std::string format_date(Date date);
std::optional<Date> parse_date(std::string_view text);

/// "08:30" (24-hour)
std::string format_time_of_day(TimeOfDay t);
std::optional<TimeOfDay> parse_time_of_day(std::string_view text);

/// Calendar date of `ts` for a participant whose UTC offset is fixed at
/// enrollment. Day numbering never shifts with DST.
Date local_date(Timestamp ts, int utc_offset_minutes);

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override;
};

/// Test and simulation clock; safe to advance from another thread.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start) : now_(start.time_since_epoch().count()) {}

    Timestamp now() const override { return Timestamp{std::chrono::seconds{now_.load()}}; }
    void set(Timestamp ts) { now_.store(ts.time_since_epoch().count()); }
    void advance(std::chrono::seconds by) { now_.fetch_add(by.count()); }

private:
    std::atomic<long long> now_;
};

} // namespace studyu
