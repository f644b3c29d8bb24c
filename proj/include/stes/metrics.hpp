#pragma once

#include <map>
#include <string>
#include <vector>

#include "stes/checkin.hpp"

namespace stes {

// One answered query: the ranked venue ids for a (user, timeslot).
struct QueryResult {
    std::string user_id;
    Timeslot slot = Timeslot::Morning;
    std::vector<std::string> ranked_venues;
};

// A test case: one held-out check-in with its query slot.
struct TestCase {
    std::string user_id;
    Timeslot slot = Timeslot::Morning;
    std::string venue_id;
};

struct TopKMetrics {
    std::map<int, double> precision;  // p@k over (user, slot) queries
    std::map<int, double> recall;     // r@k likewise
    std::map<int, double> accuracy;   // acc@k over test check-ins
    std::map<int, double> map;        // MAP@k over test check-ins
    size_t queries = 0;               // (user, slot) units averaged
    size_t queries_skipped = 0;       // no recommendation available
    size_t test_cases = 0;
    size_t test_cases_skipped = 0;
    size_t unreachable_venues = 0;  // ground truth absent from every ranking's universe
};

// p@k and r@k use the set-intersection formulas averaged over (user,
// timeslot) query units; acc@k and MAP@k average over individual test
// check-ins, with AveP = 1/rank of the single relevant item when it appears
// in the top-k and 0 otherwise.
TopKMetrics metric_suite(const std::vector<QueryResult>& results,
                         const std::vector<TestCase>& test_cases, const std::vector<int>& ks);

struct SplitStats {
    size_t train = 0;
    size_t test = 0;
    size_t train_only_users = 0;  // users with < 2 check-ins
};

// Per-user chronological prefix/suffix split at ceil(ratio * n). Users with a
// single check-in go wholly to train.
void split_train_test(const std::vector<CheckIn>& checkins, double ratio,
                      std::vector<CheckIn>& train, std::vector<CheckIn>& test,
                      SplitStats* stats = nullptr);

}  // namespace stes
