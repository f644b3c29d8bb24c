#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace stes {

// One check-in record: user u visited venue l with functional role f at time t.
struct CheckIn {
    std::string user_id;
    std::string venue_id;   // location word
    std::string category;   // second-level venue category
    int64_t epoch_seconds = 0;  // UTC instant
    double lat = 0.0;
    double lon = 0.0;
};

// 10 functional timeslots partitioning the week (weekday/weekend x 5 buckets).
enum class Timeslot : uint8_t {
    Morning,
    Noon,
    Afternoon,
    Evening,
    Night,
    WeekendMorning,
    WeekendNoon,
    WeekendAfternoon,
    WeekendEvening,
    WeekendNight,
};

inline constexpr int kTimeslotCount = 10;

inline constexpr std::array<std::string_view, kTimeslotCount> kTimeslotNames = {
    "Morning",        "Noon",        "Afternoon",        "Evening",        "Night",
    "WeekendMorning", "WeekendNoon", "WeekendAfternoon", "WeekendEvening", "WeekendNight",
};

std::string_view to_string(Timeslot slot);
std::optional<Timeslot> timeslot_from_string(std::string_view name);

// Broken-down local civil time, produced by CivilClock below.
struct LocalTime {
    int year = 1970;
    int month = 1;   // 1..12
    int day = 1;     // 1..31
    int weekday = 4; // 0 = Sunday .. 6 = Saturday (1970-01-01 was a Thursday)
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Fixed-offset civil clock. City-scale corpora come with one zone offset in
// config; DST is ignored on purpose (documented in the config reference).
class CivilClock {
public:
    explicit CivilClock(int utc_offset_minutes = 0) : offset_minutes_(utc_offset_minutes) {}

    LocalTime to_local(int64_t epoch_seconds) const;
    int utc_offset_minutes() const { return offset_minutes_; }

private:
    int offset_minutes_;
};

// Buckets: Morning 6:00-10:59, Noon 11:00-13:59, Afternoon 14:00-17:59,
// Evening 18:00-21:59, Night 22:00-5:59. Saturday/Sunday map to Weekend*.
Timeslot discretize_time(const LocalTime& local);
Timeslot discretize_time(int64_t epoch_seconds, const CivilClock& clock);

bool is_weekend_slot(Timeslot slot);
// Daytime = morning/noon/afternoon buckets, nighttime = evening/night buckets.
bool is_daytime_slot(Timeslot slot);
Timeslot weekday_variant(Timeslot slot);

// Feature word: "<category>_<TimeslotName>".
std::string make_feature_word(std::string_view category, Timeslot slot);

struct FeatureWordParts {
    std::string category;
    Timeslot slot;
};

// Splits on the last underscore; fails if the suffix is not a timeslot name.
std::optional<FeatureWordParts> parse_feature_word(std::string_view token);

// ISO-8601 "YYYY-MM-DDTHH:MM:SS" with optional "Z" or "+HH:MM" offset.
// Returns the UTC epoch, or nullopt on malformed input.
std::optional<int64_t> parse_iso8601(std::string_view text);
std::string format_iso8601_utc(int64_t epoch_seconds);

// Inverse of CivilClock::to_local for (year, month, day, hour, minute, second).
int64_t epoch_from_local(const LocalTime& local, const CivilClock& clock);
int days_in_month(int year, int month);

bool valid_coordinates(double lat, double lon);

}  // namespace stes
