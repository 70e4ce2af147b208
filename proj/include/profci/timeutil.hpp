#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace profci {

// All engine timestamps are UTC instants with second precision.
using Timestamp = std::chrono::sys_seconds;

// Fixed UTC offset, the only timezone notion the engine supports.
// Named timezone databases are deliberately out: punch cards only need an
// offset, and CI machines cannot be assumed to carry tzdata.
struct UtcOffset {
    std::chrono::minutes offset{0};
};

// "2016-11-07T09:30:00Z" (always Z, always seconds).
std::string format_rfc3339(Timestamp t);

// Accepts RFC 3339 with 'Z' or a numeric offset, optional fractional
// seconds (truncated). Returns nullopt on anything else.
std::optional<Timestamp> parse_rfc3339(const std::string& text);

// "UTC", "Z", "+HH:MM" or "-HH:MM". Nullopt on anything else.
std::optional<UtcOffset> parse_utc_offset(const std::string& text);

} // namespace profci
