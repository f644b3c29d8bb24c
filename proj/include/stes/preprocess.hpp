#pragma once

#include <cstddef>
#include <vector>

#include "stes/checkin.hpp"

namespace stes {

struct PreprocessStats {
    size_t input = 0;
    size_t deduped = 0;        // consecutive same-venue repeats removed
    size_t filtered = 0;       // removed by the min-posts fixed point
    size_t iterations = 0;     // fixed-point rounds
    size_t output = 0;
};

// Per user (chronological order): collapse consecutive same-venue runs to the
// first check-in, then iteratively drop users and venues with fewer than
// min_posts check-ins until stable. An optional max gap (seconds) limits how
// far apart two check-ins may be and still count as the same run; <= 0
// disables the cap.
std::vector<CheckIn> preprocess(std::vector<CheckIn> checkins, size_t min_posts,
                                PreprocessStats* stats = nullptr,
                                int64_t dedup_max_gap_seconds = 0);

// Stable chronological sort per user (ties keep input order).
void sort_checkins(std::vector<CheckIn>& checkins);

}  // namespace stes
