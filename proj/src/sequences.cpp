#include "stes/sequences.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "stes/preprocess.hpp"

namespace stes {

std::string to_string(YearMonth ym) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", ym.year(), ym.month());
    return buf;
}

YearMonth month_of(int64_t epoch_seconds, const CivilClock& clock) {
    const LocalTime lt = clock.to_local(epoch_seconds);
    return YearMonth::of(lt.year, lt.month);
}

std::vector<TokenSequence> build_sequences(const std::vector<CheckIn>& checkins,
                                           Grouping grouping, const CivilClock& clock,
                                           const NeighborhoodMap* map, SequenceStats* stats) {
    if (grouping == Grouping::Neighborhood && map == nullptr) {
        throw std::invalid_argument("neighborhood grouping requires a neighborhood map");
    }
    SequenceStats local;

    struct Row {
        std::string entity;
        YearMonth month;
        int64_t ts;
        size_t input_order;
        const CheckIn* c;
    };
    std::vector<Row> rows;
    rows.reserve(checkins.size());
    for (size_t i = 0; i < checkins.size(); ++i) {
        const CheckIn& c = checkins[i];
        std::string entity;
        if (grouping == Grouping::User) {
            entity = c.user_id;
        } else {
            auto id = map->lookup(c.lat, c.lon);
            if (!id) {
                ++local.outside_polygons;
                continue;
            }
            entity = std::move(*id);
        }
        rows.push_back({std::move(entity), month_of(c.epoch_seconds, clock), c.epoch_seconds, i, &c});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.entity != b.entity) return a.entity < b.entity;
        if (a.month != b.month) return a.month < b.month;
        if (a.ts != b.ts) return a.ts < b.ts;
        return a.input_order < b.input_order;
    });

    std::vector<TokenSequence> sequences;
    for (const Row& row : rows) {
        if (sequences.empty() || sequences.back().entity_id != row.entity ||
            sequences.back().month != row.month) {
            TokenSequence seq;
            seq.entity_id = row.entity;
            seq.month = row.month;
            sequences.push_back(std::move(seq));
        }
        TokenSequence& seq = sequences.back();
        const Timeslot slot = discretize_time(row.c->epoch_seconds, clock);
        seq.feature_words.push_back(make_feature_word(row.c->category, slot));
        seq.location_words.push_back(row.c->venue_id);
        seq.coordinates.push_back({row.c->lat, row.c->lon});
        ++local.tokens;
    }
    local.sequences = sequences.size();
    if (stats) *stats = local;
    return sequences;
}

}  // namespace stes
