#include "stes/preprocess.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace stes {

void sort_checkins(std::vector<CheckIn>& checkins) {
    std::stable_sort(checkins.begin(), checkins.end(), [](const CheckIn& a, const CheckIn& b) {
        if (a.user_id != b.user_id) return a.user_id < b.user_id;
        return a.epoch_seconds < b.epoch_seconds;
    });
}

std::vector<CheckIn> preprocess(std::vector<CheckIn> checkins, size_t min_posts,
                                PreprocessStats* stats, int64_t dedup_max_gap_seconds) {
    PreprocessStats local;
    local.input = checkins.size();
    sort_checkins(checkins);

    // Collapse consecutive same-user same-venue runs to the run's first record.
    std::vector<CheckIn> kept;
    kept.reserve(checkins.size());
    for (auto& c : checkins) {
        if (!kept.empty()) {
            const CheckIn& prev = kept.back();
            const bool same_run = prev.user_id == c.user_id && prev.venue_id == c.venue_id &&
                                  (dedup_max_gap_seconds <= 0 ||
                                   c.epoch_seconds - prev.epoch_seconds <= dedup_max_gap_seconds);
            if (same_run) {
                ++local.deduped;
                continue;
            }
        }
        kept.push_back(std::move(c));
    }

    // User and venue thresholds interact, so iterate to a fixed point.
    if (min_posts > 1) {
        while (true) {
            ++local.iterations;
            std::unordered_map<std::string, size_t> user_count, venue_count;
            for (const auto& c : kept) {
                ++user_count[c.user_id];
                ++venue_count[c.venue_id];
            }
            std::vector<CheckIn> next;
            next.reserve(kept.size());
            for (auto& c : kept) {
                if (user_count[c.user_id] >= min_posts && venue_count[c.venue_id] >= min_posts) {
                    next.push_back(std::move(c));
                }
            }
            const bool stable = next.size() == kept.size();
            local.filtered += kept.size() - next.size();
            kept = std::move(next);
            if (stable || kept.empty()) break;
        }
    }

    local.output = kept.size();
    if (stats) *stats = local;
    return kept;
}

}  // namespace stes
