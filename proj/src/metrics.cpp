#include "stes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "stes/preprocess.hpp"

namespace stes {

TopKMetrics metric_suite(const std::vector<QueryResult>& results,
                         const std::vector<TestCase>& test_cases, const std::vector<int>& ks) {
    if (ks.empty()) throw std::invalid_argument("no k values given");
    TopKMetrics m;
    for (int k : ks) {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        m.precision[k] = m.recall[k] = m.accuracy[k] = m.map[k] = 0.0;
    }

    std::map<std::pair<std::string, Timeslot>, const QueryResult*> by_query;
    std::set<std::string> universe;
    for (const auto& r : results) {
        by_query[{r.user_id, r.slot}] = &r;
        universe.insert(r.ranked_venues.begin(), r.ranked_venues.end());
    }

    // Group ground truth per (user, slot) for the set-based metrics.
    std::map<std::pair<std::string, Timeslot>, std::set<std::string>> gt;
    for (const auto& t : test_cases) gt[{t.user_id, t.slot}].insert(t.venue_id);

    for (const auto& [key, gt_set] : gt) {
        auto it = by_query.find(key);
        if (it == by_query.end()) {
            ++m.queries_skipped;
            continue;
        }
        const auto& ranked = it->second->ranked_venues;
        for (int k : ks) {
            size_t hits = 0;
            const size_t depth = std::min<size_t>(k, ranked.size());
            for (size_t i = 0; i < depth; ++i) {
                if (gt_set.count(ranked[i])) ++hits;
            }
            m.precision[k] += static_cast<double>(hits) / k;
            m.recall[k] += static_cast<double>(hits) / static_cast<double>(gt_set.size());
        }
        ++m.queries;
    }
    if (m.queries > 0) {
        for (int k : ks) {
            m.precision[k] /= static_cast<double>(m.queries);
            m.recall[k] /= static_cast<double>(m.queries);
        }
    }

    for (const auto& t : test_cases) {
        auto it = by_query.find({t.user_id, t.slot});
        if (it == by_query.end()) {
            ++m.test_cases_skipped;
            continue;
        }
        if (!universe.count(t.venue_id)) ++m.unreachable_venues;
        const auto& ranked = it->second->ranked_venues;
        size_t rank = 0;  // 1-based rank of the true venue, 0 = not found
        for (size_t i = 0; i < ranked.size(); ++i) {
            if (ranked[i] == t.venue_id) {
                rank = i + 1;
                break;
            }
        }
        for (int k : ks) {
            const bool hit = rank >= 1 && rank <= static_cast<size_t>(k);
            m.accuracy[k] += hit ? 1.0 : 0.0;
            m.map[k] += hit ? 1.0 / static_cast<double>(rank) : 0.0;
        }
        ++m.test_cases;
    }
    if (m.test_cases > 0) {
        for (int k : ks) {
            m.accuracy[k] /= static_cast<double>(m.test_cases);
            m.map[k] /= static_cast<double>(m.test_cases);
        }
    }
    return m;
}

void split_train_test(const std::vector<CheckIn>& checkins, double ratio,
                      std::vector<CheckIn>& train, std::vector<CheckIn>& test,
                      SplitStats* stats) {
    if (!(ratio > 0.0) || ratio >= 1.0) throw std::invalid_argument("ratio must be in (0, 1)");
    std::vector<CheckIn> sorted = checkins;
    sort_checkins(sorted);
    train.clear();
    test.clear();
    SplitStats local;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j < sorted.size() && sorted[j].user_id == sorted[i].user_id) ++j;
        const size_t n = j - i;
        if (n < 2) {
            for (size_t t = i; t < j; ++t) train.push_back(sorted[t]);
            ++local.train_only_users;
        } else {
            const size_t n_train = static_cast<size_t>(
                std::ceil(ratio * static_cast<double>(n)));
            for (size_t t = i; t < j; ++t) {
                (t - i < n_train ? train : test).push_back(sorted[t]);
            }
        }
        i = j;
    }
    local.train = train.size();
    local.test = test.size();
    if (stats) *stats = local;
}

}  // namespace stes
