#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stes/checkin.hpp"
#include "stes/geo.hpp"

namespace stes {

// Calendar year-month in local time, encoded as year*12 + (month-1).
struct YearMonth {
    int32_t index = 0;

    static YearMonth of(int year, int month) { return {year * 12 + (month - 1)}; }
    int year() const { return index / 12; }
    int month() const { return index % 12 + 1; }
    YearMonth next() const { return {index + 1}; }
    auto operator<=>(const YearMonth&) const = default;
};

std::string to_string(YearMonth ym);

// Parallel feature-word / location-word streams for one (entity, month).
struct TokenSequence {
    std::string entity_id;
    YearMonth month;
    std::vector<std::string> feature_words;
    std::vector<std::string> location_words;
    std::vector<GeoPoint> coordinates;

    size_t size() const { return feature_words.size(); }
};

enum class Grouping { User, Neighborhood };

struct SequenceStats {
    size_t sequences = 0;
    size_t tokens = 0;
    size_t outside_polygons = 0;  // dropped for neighborhood grouping
};

// One sequence per (entity, calendar month), chronologically ordered, with
// feature words, location words, and coordinates aligned one-to-one.
// Neighborhood grouping requires a map; check-ins outside all polygons are
// dropped and counted.
std::vector<TokenSequence> build_sequences(const std::vector<CheckIn>& checkins,
                                           Grouping grouping, const CivilClock& clock,
                                           const NeighborhoodMap* map = nullptr,
                                           SequenceStats* stats = nullptr);

YearMonth month_of(int64_t epoch_seconds, const CivilClock& clock);

}  // namespace stes
