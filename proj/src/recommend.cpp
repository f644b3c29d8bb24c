#include "stes/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stes {

void StesConfig::validate() const {
    if (preferred_categories < 1) throw std::invalid_argument("C must be >= 1");
    if (!(a1 > 0) || !(b1 > 0)) throw std::invalid_argument("a1 and b1 must be > 0");
    if (a2 < 0 || b2 < 0) throw std::invalid_argument("a2 and b2 must be >= 0");
}

double cosine(std::span<const double> a, std::span<const double> b,
              std::atomic<size_t>* zero_counter) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine of mismatched dims");
    double num = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        if (zero_counter) zero_counter->fetch_add(1, std::memory_order_relaxed);
        return 0.0;
    }
    return num / (std::sqrt(na) * std::sqrt(nb));
}

DecayFactors decay_factors(int category_rank, double dist_km, const StesConfig& cfg) {
    if (dist_km < 0) throw std::invalid_argument("distance must be >= 0");
    return {cfg.a1 * std::exp(-cfg.a2 * category_rank), cfg.b1 * std::exp(-cfg.b2 * dist_km)};
}

std::vector<std::string> rank_categories(std::span<const double> user_vec,
                                         const std::vector<const CheckInVector*>& user_checkins,
                                         const StesConfig& cfg) {
    std::map<std::string, std::pair<double, size_t>> scores;  // sum-or-max, count
    for (const auto* c : user_checkins) {
        const double s = cosine(user_vec, c->vec);
        auto [it, inserted] = scores.try_emplace(c->category, s, 1);
        if (!inserted) {
            if (cfg.aggregate == StesConfig::Aggregate::Max) {
                it->second.first = std::max(it->second.first, s);
            } else {
                it->second.first += s;
                ++it->second.second;
            }
        }
    }
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [cat, agg] : scores) {
        const double score = cfg.aggregate == StesConfig::Aggregate::Max
                                 ? agg.first
                                 : agg.first / static_cast<double>(agg.second);
        ranked.emplace_back(cat, score);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<size_t>(cfg.preferred_categories)) {
        ranked.resize(static_cast<size_t>(cfg.preferred_categories));
    }
    std::vector<std::string> out;
    out.reserve(ranked.size());
    for (auto& [cat, _] : ranked) out.push_back(std::move(cat));
    return out;
}

Recommender::Recommender(std::vector<LocationProfile> venues, std::vector<UserProfiles> users,
                         std::vector<CheckInVector> user_checkins, StesConfig cfg,
                         SpatialAnchor anchor)
    : venues_(std::move(venues)),
      users_(std::move(users)),
      checkins_(std::move(user_checkins)),
      cfg_(std::move(cfg)),
      anchor_(anchor) {
    cfg_.validate();
    std::sort(venues_.begin(), venues_.end(),
              [](const LocationProfile& a, const LocationProfile& b) {
                  return a.venue_id < b.venue_id;
              });
    for (const auto& u : users_) user_index_[u.user_id] = &u;
    for (const auto& c : checkins_) checkins_by_user_[c.user_id].push_back(&c);
}

bool Recommender::has_user(const std::string& user_id) const {
    return user_index_.count(user_id) > 0;
}

Recommendation Recommender::recommend(const std::string& user_id, Timeslot slot, int k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto uit = user_index_.find(user_id);
    if (uit == user_index_.end()) {
        throw std::out_of_range("unknown user: " + user_id);
    }
    const UserProfiles& user = *uit->second;

    Recommendation rec;
    rec.user_id = user_id;
    rec.slot = slot;

    const UserTimeslotProfile* slot_profile = user.slot_profile(slot);
    std::span<const double> user_vec;
    GeoPoint centroid;
    if (slot_profile) {
        user_vec = slot_profile->vec;
        centroid = slot_profile->centroid;
    } else {
        user_vec = user.overall_vec;
        centroid = user.overall_centroid;
        rec.used_fallback_profile = true;
    }

    GeoPoint anchor = centroid;
    if (anchor_ == SpatialAnchor::MostRecentCheckin) {
        auto cit = checkins_by_user_.find(user_id);
        if (cit != checkins_by_user_.end() && !cit->second.empty()) {
            const CheckInVector* latest = cit->second.front();
            for (const auto* c : cit->second) {
                if (c->epoch_seconds >= latest->epoch_seconds) latest = c;
            }
            anchor = latest->coords;
        }
    }

    std::vector<const CheckInVector*> user_checkins;
    if (auto cit = checkins_by_user_.find(user_id); cit != checkins_by_user_.end()) {
        user_checkins = cit->second;
    }
    const auto preferred = rank_categories(user_vec, user_checkins, cfg_);

    std::map<std::string, int> category_rank;
    for (size_t i = 0; i < preferred.size(); ++i) {
        category_rank[preferred[i]] = static_cast<int>(i);
    }

    // Candidates: venues whose dominant category is preferred. Venue order is
    // id-ascending, so equal scores resolve deterministically.
    for (const auto& venue : venues_) {
        auto rit = category_rank.find(venue.dominant_category);
        if (rit == category_rank.end()) continue;
        const double sim = cosine(user_vec, venue.vec, &zero_hits_);
        const double dist = haversine_km(venue.centroid, anchor);
        const auto decay = decay_factors(rit->second, dist, cfg_);
        rec.items.push_back({venue.venue_id, sim * decay.category * decay.spatial});
    }
    std::stable_sort(rec.items.begin(), rec.items.end(),
                     [](const ScoredVenue& a, const ScoredVenue& b) { return a.score > b.score; });
    if (rec.items.size() > static_cast<size_t>(k)) rec.items.resize(static_cast<size_t>(k));
    return rec;
}

}  // namespace stes
