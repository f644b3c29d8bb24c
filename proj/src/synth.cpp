#include "stes/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "stes/analysis.hpp"

namespace stes {

namespace {

constexpr double kKmPerDegLat = 110.574;

double km_per_deg_lon(double lat) {
    return 111.320 * std::cos(lat * M_PI / 180.0);
}

// Built-in "TopLevel_Sub" category pool; top level feeds zone mixes and
// composition tables.
const std::vector<std::string>& category_pool() {
    static const std::vector<std::string> pool = {
        "Residence_Home",      "Residence_Apartment", "Food_Restaurant", "Food_Cafe",
        "Nightlife_Bar",       "Nightlife_Club",      "Professional_Office",
        "Professional_School", "Shop_Market",         "Shop_Mall",
        "Travel_Station",      "Travel_Stop",
    };
    return pool;
}

struct ZoneMix {
    std::vector<std::pair<std::string, double>> weights;  // top-level -> mass
};

const std::vector<ZoneMix>& zone_mixes() {
    static const std::vector<ZoneMix> mixes = {
        {{{"Residence", 0.60}, {"Food", 0.20}, {"Shop", 0.10}, {"Professional", 0.10}}},
        {{{"Professional", 0.50}, {"Food", 0.20}, {"Shop", 0.20}, {"Travel", 0.10}}},
        {{{"Nightlife", 0.55}, {"Food", 0.30}, {"Shop", 0.10}, {"Residence", 0.05}}},
        {{{"Travel", 0.60}, {"Shop", 0.20}, {"Food", 0.15}, {"Residence", 0.05}}},
    };
    return mixes;
}

double crime_weight(const std::string& top_level) {
    if (top_level == "Residence") return 0.05;
    if (top_level == "Food") return 0.5;
    if (top_level == "Nightlife") return 9.5;
    if (top_level == "Professional") return 3.5;
    if (top_level == "Shop") return 2.0;
    if (top_level == "Travel") return 1.8;
    return 1.0;
}

double grand_larceny_share(int zone) {
    switch (zone % 4) {
        case 0: return 0.10;
        case 1: return 0.50;
        case 2: return 0.30;
        default: return 0.40;
    }
}

// Portable Poisson by inversion; fine for the small rates used here.
int64_t draw_poisson(double lambda, std::mt19937_64& rng) {
    if (lambda <= 0) return 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    int64_t k = 0;
    while (true) {
        prod *= u(rng);
        if (prod <= limit) return k;
        ++k;
        if (k > 1000) return k;  // unreachable at sane rates
    }
}

// Hour menu per daily bucket (0..4): Morning..Night; Night wraps past midnight.
const std::vector<std::vector<int>>& bucket_hours() {
    static const std::vector<std::vector<int>> hours = {
        {6, 7, 8, 9, 10}, {11, 12, 13}, {14, 15, 16, 17}, {18, 19, 20, 21},
        {22, 23, 0, 1, 2, 3, 4, 5},
    };
    return hours;
}

}  // namespace

std::string synth_user_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%04d", index);
    return buf;
}

std::string synth_venue_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%05d", index);
    return buf;
}

std::string synth_neighborhood_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "SYN%04d", index);
    return buf;
}

void SynthConfig::validate() const {
    if (users < 1 || venues < 1 || categories < 1 || neighborhoods < 1 || months < 1 ||
        checkins_per_user_month < 1 || archetypes < 1 || zone_types < 1) {
        throw std::invalid_argument("synthetic config counts must be >= 1");
    }
    if (venues < categories) {
        throw std::invalid_argument("need at least one venue per category");
    }
    if (!(cell_km > 0) || !(locality_km > 0)) {
        throw std::invalid_argument("dispersion scales must be > 0");
    }
    if (first_month < 1 || first_month > 12) throw std::invalid_argument("bad first month");
    if (!preference_override.empty()) {
        if (preference_override.size() != kTimeslotCount) {
            throw std::invalid_argument("preference override needs one row per timeslot");
        }
        for (const auto& row : preference_override) {
            if (static_cast<int>(row.size()) != categories) {
                throw std::invalid_argument("preference row width must equal category count");
            }
            double sum = 0.0;
            for (double p : row) sum += p;
            if (std::abs(sum - 1.0) > 1e-9) {
                throw std::invalid_argument("preference rows must sum to 1");
            }
        }
    }
}

SynthWorld generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthWorld world;
    world.clock = CivilClock(cfg.utc_offset_minutes);

    // Category names: pool first, then generated extras cycling top levels.
    const auto& pool = category_pool();
    static const std::vector<std::string> tops = {"Residence", "Food",  "Nightlife",
                                                  "Professional", "Shop", "Travel"};
    for (int i = 0; i < cfg.categories; ++i) {
        if (i < static_cast<int>(pool.size())) {
            world.category_names.push_back(pool[i]);
        } else {
            world.category_names.push_back(tops[i % tops.size()] + "_X" + std::to_string(i));
        }
    }
    std::map<std::string, std::vector<int>> categories_by_top;
    for (int i = 0; i < cfg.categories; ++i) {
        categories_by_top[top_level_category(world.category_names[i])].push_back(i);
    }

    // Neighborhood grid with planted zones, balanced by a seeded shuffle.
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.neighborhoods))));
    const double dlat = cfg.cell_km / kKmPerDegLat;
    const double dlon = cfg.cell_km / km_per_deg_lon(cfg.base_lat);
    std::mt19937_64 rng(cfg.seed);
    world.zone_of.resize(cfg.neighborhoods);
    {
        std::vector<int> order(cfg.neighborhoods);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < cfg.neighborhoods; ++i) {
            world.zone_of[order[i]] = i % cfg.zone_types;
        }
    }
    struct Cell {
        double lat0, lat1, lon0, lon1;
    };
    std::vector<Cell> cells(cfg.neighborhoods);
    for (int i = 0; i < cfg.neighborhoods; ++i) {
        const int row = i / grid;
        const int col = i % grid;
        Cell c;
        c.lat0 = cfg.base_lat + row * dlat;
        c.lat1 = c.lat0 + dlat;
        c.lon0 = cfg.base_lon + col * dlon;
        c.lon1 = c.lon0 + dlon;
        cells[i] = c;
        world.neighborhood_ids.push_back(synth_neighborhood_id(i));

        NeighborhoodPolygon poly;
        poly.id = world.neighborhood_ids.back();
        PolygonRing ring;
        ring.lons = {c.lon0, c.lon1, c.lon1, c.lon0, c.lon0};
        ring.lats = {c.lat0, c.lat0, c.lat1, c.lat1, c.lat0};
        poly.rings.push_back(std::move(ring));
        poly.compute_bbox();
        world.map.add(std::move(poly));
    }
    world.map.build_index();

    // Venues: uniform cell, jittered position, category from the zone mix.
    struct Venue {
        int neighborhood;
        int category;
        double lat, lon;
    };
    std::vector<Venue> venues(cfg.venues);
    std::uniform_int_distribution<int> pick_cell(0, cfg.neighborhoods - 1);
    std::uniform_real_distribution<double> jitter(0.1, 0.9);
    const auto& mixes = zone_mixes();
    for (int v = 0; v < cfg.venues; ++v) {
        Venue venue;
        venue.neighborhood = pick_cell(rng);
        const Cell& c = cells[venue.neighborhood];
        venue.lat = c.lat0 + jitter(rng) * (c.lat1 - c.lat0);
        venue.lon = c.lon0 + jitter(rng) * (c.lon1 - c.lon0);
        const ZoneMix& mix = mixes[world.zone_of[venue.neighborhood] % mixes.size()];
        // Draw a top level present in the active category set.
        double total = 0.0;
        for (const auto& [top, w] : mix.weights) {
            if (categories_by_top.count(top)) total += w;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double t = u(rng);
        std::string chosen_top = mix.weights.front().first;
        for (const auto& [top, w] : mix.weights) {
            if (!categories_by_top.count(top)) continue;
            t -= w;
            if (t <= 0) {
                chosen_top = top;
                break;
            }
        }
        const auto& members = categories_by_top[chosen_top];
        std::uniform_int_distribution<size_t> pick_member(0, members.size() - 1);
        venue.category = members[pick_member(rng)];
        venues[v] = venue;
    }
    // Guarantee every category has a venue (preference draws must be feasible).
    {
        std::vector<int> venue_count(cfg.categories, 0);
        for (const auto& v : venues) ++venue_count[v.category];
        for (int cat = 0; cat < cfg.categories; ++cat) {
            if (venue_count[cat] > 0) continue;
            for (auto& venue : venues) {
                if (venue_count[venue.category] > 1) {
                    --venue_count[venue.category];
                    venue.category = cat;
                    ++venue_count[cat];
                    break;
                }
            }
        }
    }
    std::vector<std::vector<int>> venues_by_category(cfg.categories);
    for (int v = 0; v < cfg.venues; ++v) venues_by_category[venues[v].category].push_back(v);

    // Archetype preference matrices from the semantics seed: a few favored
    // categories per slot over a uniform floor.
    std::mt19937_64 rng_sem(cfg.semantics_seed);
    world.preferences.resize(cfg.archetypes);
    for (int a = 0; a < cfg.archetypes; ++a) {
        auto& matrix = world.preferences[a];
        matrix.assign(kTimeslotCount, std::vector<double>(cfg.categories, 0.0));
        for (int s = 0; s < kTimeslotCount; ++s) {
            if (!cfg.preference_override.empty()) {
                matrix[s] = cfg.preference_override[s];
                continue;
            }
            std::vector<int> order(cfg.categories);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng_sem);
            static const double favored_mass[3] = {0.5, 0.2, 0.1};
            const int favored = std::min(3, cfg.categories - 1);
            double used = 0.0;
            for (int f = 0; f < favored; ++f) {
                matrix[s][order[f]] = favored_mass[f];
                used += favored_mass[f];
            }
            const int rest = cfg.categories - favored;
            if (rest > 0) {
                const double share = (1.0 - used) / rest;
                for (int f = favored; f < cfg.categories; ++f) matrix[s][order[f]] = share;
            } else {
                for (auto& p : matrix[s]) p /= used;
            }
        }
    }

    // Users: home location and archetype.
    const double city_lat1 = cfg.base_lat + grid * dlat;
    const double city_lon1 = cfg.base_lon + grid * dlon;
    struct User {
        double home_lat, home_lon;
    };
    std::vector<User> users(cfg.users);
    std::uniform_real_distribution<double> ulat(cfg.base_lat, city_lat1);
    std::uniform_real_distribution<double> ulon(cfg.base_lon, city_lon1);
    world.archetype_of_user.resize(cfg.users);
    for (int u = 0; u < cfg.users; ++u) {
        users[u] = {ulat(rng), ulon(rng)};
        world.archetype_of_user[u] = u % cfg.archetypes;
    }

    // Check-ins.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> venue_weights;
    for (int u = 0; u < cfg.users; ++u) {
        const auto& prefs = world.preferences[world.archetype_of_user[u]];
        for (int m = 0; m < cfg.months; ++m) {
            const int month0 = (cfg.first_year * 12 + cfg.first_month - 1) + m;
            const int year = month0 / 12;
            const int month = month0 % 12 + 1;
            const int mdays = days_in_month(year, month);
            for (int n = 0; n < cfg.checkins_per_user_month; ++n) {
                std::uniform_int_distribution<int> pick_day(1, mdays);
                const int day = pick_day(rng);
                LocalTime lt;
                lt.year = year;
                lt.month = month;
                lt.day = day;
                std::uniform_int_distribution<int> pick_bucket(0, 4);
                const int bucket = pick_bucket(rng);
                const auto& hours = bucket_hours()[bucket];
                std::uniform_int_distribution<size_t> pick_hour(0, hours.size() - 1);
                lt.hour = hours[pick_hour(rng)];
                std::uniform_int_distribution<int> pick_min(0, 59);
                lt.minute = pick_min(rng);
                lt.second = pick_min(rng);
                const int64_t ts = epoch_from_local(lt, world.clock);
                const Timeslot slot = discretize_time(ts, world.clock);

                // Category from the planted per-slot preference row.
                const auto& row = prefs[static_cast<size_t>(slot)];
                double t = unit(rng);
                int category = cfg.categories - 1;
                for (int cat = 0; cat < cfg.categories; ++cat) {
                    t -= row[cat];
                    if (t <= 0) {
                        category = cat;
                        break;
                    }
                }
                const auto& candidates = venues_by_category[category];
                if (candidates.empty()) {
                    throw std::runtime_error("no venue carries category " +
                                             world.category_names[category]);
                }
                // Distance-decayed venue choice around home.
                venue_weights.resize(candidates.size());
                double total = 0.0;
                for (size_t i = 0; i < candidates.size(); ++i) {
                    const Venue& venue = venues[candidates[i]];
                    const double d = haversine_km(users[u].home_lat, users[u].home_lon,
                                                  venue.lat, venue.lon);
                    venue_weights[i] = std::exp(-d / cfg.locality_km);
                    total += venue_weights[i];
                }
                double pick = unit(rng) * total;
                size_t chosen = candidates.size() - 1;
                for (size_t i = 0; i < candidates.size(); ++i) {
                    pick -= venue_weights[i];
                    if (pick <= 0) {
                        chosen = i;
                        break;
                    }
                }
                const Venue& venue = venues[candidates[chosen]];
                CheckIn c;
                c.user_id = synth_user_id(u);
                c.venue_id = synth_venue_id(candidates[chosen]);
                c.category = world.category_names[venue.category];
                c.epoch_seconds = ts;
                c.lat = venue.lat;
                c.lon = venue.lon;
                world.checkins.push_back(std::move(c));
            }
        }
    }

    // Crimes: per-neighborhood intensity from the venue mix, one extra month
    // so the last check-in month has next-month labels.
    std::vector<double> lambda(cfg.neighborhoods, 0.0);
    {
        std::vector<int> venue_totals(cfg.neighborhoods, 0);
        for (const auto& v : venues) {
            lambda[v.neighborhood] += crime_weight(top_level_category(world.category_names[v.category]));
            ++venue_totals[v.neighborhood];
        }
        for (int i = 0; i < cfg.neighborhoods; ++i) {
            lambda[i] = venue_totals[i] > 0 ? cfg.crime_scale * lambda[i] / venue_totals[i] : 0.0;
        }
    }
    static const std::vector<std::string> other_offenses = {"ASSAULT", "ROBBERY", "BURGLARY"};
    for (int m = 0; m <= cfg.months; ++m) {
        const int month0 = (cfg.first_year * 12 + cfg.first_month - 1) + m;
        const int year = month0 / 12;
        const int month = month0 % 12 + 1;
        const int mdays = days_in_month(year, month);
        for (int nb = 0; nb < cfg.neighborhoods; ++nb) {
            const int64_t incidents = draw_poisson(lambda[nb], rng);
            for (int64_t i = 0; i < incidents; ++i) {
                LocalTime lt;
                lt.year = year;
                lt.month = month;
                std::uniform_int_distribution<int> pick_day(1, mdays);
                lt.day = pick_day(rng);
                std::uniform_int_distribution<int> pick_hour(0, 23);
                lt.hour = pick_hour(rng);
                std::uniform_int_distribution<int> pick_min(0, 59);
                lt.minute = pick_min(rng);
                lt.second = pick_min(rng);
                CrimeRecord r;
                r.epoch_seconds = epoch_from_local(lt, world.clock);
                const Cell& c = cells[nb];
                r.lat = c.lat0 + jitter(rng) * (c.lat1 - c.lat0);
                r.lon = c.lon0 + jitter(rng) * (c.lon1 - c.lon0);
                if (unit(rng) < grand_larceny_share(world.zone_of[nb])) {
                    r.offense = "GRAND LARCENY";
                } else {
                    std::uniform_int_distribution<size_t> pick_off(0, other_offenses.size() - 1);
                    r.offense = other_offenses[pick_off(rng)];
                }
                world.crimes.push_back(std::move(r));
            }
        }
    }

    return world;
}

}  // namespace stes
