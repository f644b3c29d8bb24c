#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stes/checkin.hpp"
#include "stes/geo.hpp"
#include "stes/io.hpp"

namespace stes {

// Synthetic city: a grid of neighborhoods with planted functional zones,
// venues drawn from zone category mixes, users with per-timeslot category
// preferences and home-centered venue choice, and crime intensity driven by
// each neighborhood's venue mix. Every planted quantity is exposed so tests
// can check recovery against the ground truth.
struct SynthConfig {
    uint64_t seed = 42;
    // Two cities share feature-word semantics iff they share this seed.
    uint64_t semantics_seed = 7;
    int users = 200;
    int venues = 400;
    int categories = 12;  // <= the built-in hierarchical pool, then generated
    int neighborhoods = 100;
    int zone_types = 4;
    int archetypes = 4;
    int months = 3;
    int first_year = 2010;
    int first_month = 3;  // March
    int checkins_per_user_month = 30;
    double cell_km = 2.4;       // neighborhood grid cell edge
    double locality_km = 1.5;   // venue-choice distance decay scale
    double base_lat = 40.75;
    double base_lon = -73.98;
    double crime_scale = 1.0;
    int utc_offset_minutes = 0;

    // Optional override: one preference row per timeslot (rows sum to 1),
    // applied to every user. Used by planted-preference tests.
    std::vector<std::vector<double>> preference_override;

    void validate() const;
};

struct SynthWorld {
    std::vector<CheckIn> checkins;
    std::vector<CrimeRecord> crimes;
    NeighborhoodMap map;
    std::vector<std::string> neighborhood_ids;    // grid order
    std::vector<int> zone_of;                     // planted zone per neighborhood
    std::vector<std::string> category_names;
    std::vector<int> archetype_of_user;
    // [archetype][timeslot][category], rows sum to 1
    std::vector<std::vector<std::vector<double>>> preferences;
    CivilClock clock;

    const std::vector<std::vector<double>>& user_preferences(int user_index) const {
        return preferences[archetype_of_user[user_index]];
    }
};

SynthWorld generate(const SynthConfig& cfg);

std::string synth_user_id(int index);
std::string synth_venue_id(int index);
std::string synth_neighborhood_id(int index);

}  // namespace stes
