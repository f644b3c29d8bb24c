#pragma once

#include <atomic>
#include <map>
#include <string>
#include <vector>

#include "stes/profiles.hpp"

namespace stes {

struct StesConfig {
    int preferred_categories = 15;  // C
    double a1 = 0.4;                // category decay scale
    double a2 = 0.025;              // category decay rate
    double b1 = 1.0;                // spatial decay scale
    double b2 = 0.95;               // spatial decay rate (per km)
    std::vector<int> ks = {1, 5, 10};
    // How per-category user-activity similarity aggregates over that
    // category's check-ins.
    enum class Aggregate { Max, Mean } aggregate = Aggregate::Max;

    void validate() const;
};

// Zero vectors score 0; the optional counter tracks how often that happened.
double cosine(std::span<const double> a, std::span<const double> b,
              std::atomic<size_t>* zero_counter = nullptr);

struct DecayFactors {
    double category = 0.0;  // CD = a1 * exp(-a2 * rank)
    double spatial = 0.0;   // SD = b1 * exp(-b2 * dist_km)
};

DecayFactors decay_factors(int category_rank, double dist_km, const StesConfig& cfg);

struct ScoredVenue {
    std::string venue_id;
    double score = 0.0;
};

struct Recommendation {
    std::string user_id;
    Timeslot slot = Timeslot::Morning;
    std::vector<ScoredVenue> items;  // scores non-increasing, venues distinct
    bool used_fallback_profile = false;
};

// Categories ranked by user-activity similarity for one (user, slot) query,
// most preferred first, truncated to C. Ties break lexicographically.
std::vector<std::string> rank_categories(std::span<const double> user_vec,
                                         const std::vector<const CheckInVector*>& user_checkins,
                                         const StesConfig& cfg);

// Spatial decay anchor: the user's slot centroid, or the coordinates of the
// most recent check-in (variant 3).
enum class SpatialAnchor { SlotCentroid, MostRecentCheckin };

// Read-only query engine over trained profiles. Queries for users without a
// profile in the requested slot fall back to the all-check-in profile.
class Recommender {
public:
    Recommender(std::vector<LocationProfile> venues, std::vector<UserProfiles> users,
                std::vector<CheckInVector> user_checkins, StesConfig cfg,
                SpatialAnchor anchor = SpatialAnchor::SlotCentroid);

    Recommendation recommend(const std::string& user_id, Timeslot slot, int k) const;

    bool has_user(const std::string& user_id) const;
    const StesConfig& config() const { return cfg_; }
    size_t zero_vector_hits() const { return zero_hits_.load(); }
    const std::vector<LocationProfile>& venues() const { return venues_; }

private:
    std::vector<LocationProfile> venues_;
    std::vector<UserProfiles> users_;
    std::vector<CheckInVector> checkins_;
    std::map<std::string, const UserProfiles*> user_index_;
    std::map<std::string, std::vector<const CheckInVector*>> checkins_by_user_;
    StesConfig cfg_;
    SpatialAnchor anchor_;
    mutable std::atomic<size_t> zero_hits_{0};
};

}  // namespace stes
