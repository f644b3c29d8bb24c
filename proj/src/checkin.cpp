#include "stes/checkin.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace stes {

std::string_view to_string(Timeslot slot) {
    return kTimeslotNames[static_cast<size_t>(slot)];
}

std::optional<Timeslot> timeslot_from_string(std::string_view name) {
    for (size_t i = 0; i < kTimeslotNames.size(); ++i) {
        if (kTimeslotNames[i] == name) return static_cast<Timeslot>(i);
    }
    return std::nullopt;
}

namespace {

// Civil-from-days algorithm (Howard Hinnant's public-domain formulation).
void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(m <= 2 ? yr + 1 : yr);
}

int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

}  // namespace

LocalTime CivilClock::to_local(int64_t epoch_seconds) const {
    const int64_t shifted = epoch_seconds + int64_t{offset_minutes_} * 60;
    int64_t days = shifted / 86400;
    int64_t rem = shifted % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    LocalTime lt;
    civil_from_days(days, lt.year, lt.month, lt.day);
    // 1970-01-01 is a Thursday; weekday 0 = Sunday.
    lt.weekday = static_cast<int>(((days % 7) + 11) % 7);
    lt.hour = static_cast<int>(rem / 3600);
    lt.minute = static_cast<int>((rem % 3600) / 60);
    lt.second = static_cast<int>(rem % 60);
    return lt;
}

Timeslot discretize_time(const LocalTime& local) {
    const bool weekend = local.weekday == 0 || local.weekday == 6;
    const int h = local.hour;
    Timeslot base;
    if (h >= 6 && h < 11) {
        base = Timeslot::Morning;
    } else if (h >= 11 && h < 14) {
        base = Timeslot::Noon;
    } else if (h >= 14 && h < 18) {
        base = Timeslot::Afternoon;
    } else if (h >= 18 && h < 22) {
        base = Timeslot::Evening;
    } else {
        base = Timeslot::Night;
    }
    if (weekend) {
        return static_cast<Timeslot>(static_cast<int>(base) + 5);
    }
    return base;
}

Timeslot discretize_time(int64_t epoch_seconds, const CivilClock& clock) {
    return discretize_time(clock.to_local(epoch_seconds));
}

bool is_weekend_slot(Timeslot slot) {
    return static_cast<int>(slot) >= 5;
}

bool is_daytime_slot(Timeslot slot) {
    switch (weekday_variant(slot)) {
        case Timeslot::Morning:
        case Timeslot::Noon:
        case Timeslot::Afternoon:
            return true;
        default:
            return false;
    }
}

Timeslot weekday_variant(Timeslot slot) {
    const int v = static_cast<int>(slot);
    return static_cast<Timeslot>(v >= 5 ? v - 5 : v);
}

std::string make_feature_word(std::string_view category, Timeslot slot) {
    std::string token;
    token.reserve(category.size() + 1 + to_string(slot).size());
    token.append(category);
    token.push_back('_');
    token.append(to_string(slot));
    return token;
}

std::optional<FeatureWordParts> parse_feature_word(std::string_view token) {
    const size_t pos = token.rfind('_');
    if (pos == std::string_view::npos || pos == 0 || pos + 1 >= token.size()) {
        return std::nullopt;
    }
    const auto slot = timeslot_from_string(token.substr(pos + 1));
    if (!slot) return std::nullopt;
    return FeatureWordParts{std::string(token.substr(0, pos)), *slot};
}

namespace {

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<int64_t> parse_iso8601(std::string_view text) {
    // Minimal shape check: YYYY-MM-DD[T ]HH:MM:SS[Z|+HH:MM|-HH:MM]
    if (text.size() < 19) return std::nullopt;
    int year, month, day, hour, minute, second;
    if (!parse_int(text.substr(0, 4), year) || text[4] != '-' ||
        !parse_int(text.substr(5, 2), month) || text[7] != '-' ||
        !parse_int(text.substr(8, 2), day)) {
        return std::nullopt;
    }
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (!parse_int(text.substr(11, 2), hour) || text[13] != ':' ||
        !parse_int(text.substr(14, 2), minute) || text[16] != ':' ||
        !parse_int(text.substr(17, 2), second)) {
        return std::nullopt;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 60) {
        return std::nullopt;
    }
    int64_t offset_seconds = 0;
    std::string_view rest = text.substr(19);
    // Optional fractional seconds are accepted and ignored.
    if (!rest.empty() && rest[0] == '.') {
        size_t i = 1;
        while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
        rest = rest.substr(i);
    }
    if (!rest.empty()) {
        if (rest == "Z") {
            offset_seconds = 0;
        } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
            int oh, om;
            if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om)) {
                return std::nullopt;
            }
            offset_seconds = (int64_t{oh} * 60 + om) * 60;
            if (rest[0] == '-') offset_seconds = -offset_seconds;
        } else {
            return std::nullopt;
        }
    }
    const int64_t days = days_from_civil(year, month, day);
    const int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
    return local - offset_seconds;
}

std::string format_iso8601_utc(int64_t epoch_seconds) {
    CivilClock utc(0);
    const LocalTime lt = utc.to_local(epoch_seconds);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", lt.year, lt.month,
                  lt.day, lt.hour, lt.minute, lt.second);
    return buf;
}

int64_t epoch_from_local(const LocalTime& local, const CivilClock& clock) {
    const int64_t days = days_from_civil(local.year, local.month, local.day);
    const int64_t seconds = days * 86400 + local.hour * 3600 + local.minute * 60 + local.second;
    return seconds - int64_t{clock.utc_offset_minutes()} * 60;
}

int days_in_month(int year, int month) {
    const int ny = month == 12 ? year + 1 : year;
    const int nm = month == 12 ? 1 : month + 1;
    return static_cast<int>(days_from_civil(ny, nm, 1) - days_from_civil(year, month, 1));
}

bool valid_coordinates(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
}

}  // namespace stes
