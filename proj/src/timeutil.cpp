#include "profci/timeutil.hpp"

#include <cctype>
#include <cstdio>

namespace profci {

namespace {

bool all_digits(const std::string& s, size_t from, size_t count) {
    if (from + count > s.size()) return false;
    for (size_t i = from; i < from + count; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

int num(const std::string& s, size_t from, size_t count) {
    int v = 0;
    for (size_t i = from; i < from + count; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

} // namespace

std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    auto days = floor<std::chrono::days>(t);
    year_month_day ymd{days};
    hh_mm_ss<seconds> tod{t - days};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(tod.hours().count()),
                  static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

std::optional<Timestamp> parse_rfc3339(const std::string& text) {
    using namespace std::chrono;
    // YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)
    if (text.size() < 20) return std::nullopt;
    if (!all_digits(text, 0, 4) || text[4] != '-' || !all_digits(text, 5, 2) ||
        text[7] != '-' || !all_digits(text, 8, 2))
        return std::nullopt;
    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
    if (!all_digits(text, 11, 2) || text[13] != ':' || !all_digits(text, 14, 2) ||
        text[16] != ':' || !all_digits(text, 17, 2))
        return std::nullopt;

    int y = num(text, 0, 4), mo = num(text, 5, 2), d = num(text, 8, 2);
    int h = num(text, 11, 2), mi = num(text, 14, 2), se = num(text, 17, 2);

    size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        size_t fs = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == fs) return std::nullopt;
    }
    if (pos >= text.size()) return std::nullopt;

    minutes offset{0};
    char c = text[pos];
    if (c == 'Z' || c == 'z') {
        if (pos + 1 != text.size()) return std::nullopt;
    } else if (c == '+' || c == '-') {
        if (!all_digits(text, pos + 1, 2) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
            !all_digits(text, pos + 4, 2) || pos + 6 != text.size())
            return std::nullopt;
        int oh = num(text, pos + 1, 2), om = num(text, pos + 4, 2);
        if (oh > 23 || om > 59) return std::nullopt;
        offset = minutes{oh * 60 + om};
        if (c == '-') offset = -offset;
    } else {
        return std::nullopt;
    }

    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    if (h > 23 || mi > 59 || se > 60) return std::nullopt;
    if (se == 60) se = 59; // fold leap seconds

    Timestamp local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
    return local - offset;
}

std::optional<UtcOffset> parse_utc_offset(const std::string& text) {
    using namespace std::chrono;
    if (text == "UTC" || text == "utc" || text == "Z" || text == "z") return UtcOffset{};
    if (text.size() == 6 && (text[0] == '+' || text[0] == '-') && all_digits(text, 1, 2) &&
        text[3] == ':' && all_digits(text, 4, 2)) {
        int oh = num(text, 1, 2), om = num(text, 4, 2);
        if (oh > 23 || om > 59) return std::nullopt;
        minutes off{oh * 60 + om};
        return UtcOffset{text[0] == '-' ? -off : off};
    }
    return std::nullopt;
}

} // namespace profci
