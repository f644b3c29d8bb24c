#include "stes/profiles.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace stes {

std::string_view to_string(VectorMode mode) {
    switch (mode) {
        case VectorMode::Sum: return "sum";
        case VectorMode::Average: return "average";
        case VectorMode::Concat: return "concat";
        case VectorMode::FeatureOnly: return "feature_only";
        case VectorMode::LocationOnly: return "location_only";
    }
    return "sum";
}

std::optional<VectorMode> vector_mode_from_string(std::string_view name) {
    if (name == "sum") return VectorMode::Sum;
    if (name == "average") return VectorMode::Average;
    if (name == "concat") return VectorMode::Concat;
    if (name == "feature_only") return VectorMode::FeatureOnly;
    if (name == "location_only") return VectorMode::LocationOnly;
    return std::nullopt;
}

std::vector<double> combine_vectors(std::span<const double> feature,
                                    std::span<const double> location, VectorMode mode) {
    switch (mode) {
        case VectorMode::Sum:
        case VectorMode::Average: {
            if (feature.size() != location.size()) {
                throw std::invalid_argument("vector dims differ in sum/average mode");
            }
            std::vector<double> out(feature.size());
            for (size_t i = 0; i < out.size(); ++i) out[i] = feature[i] + location[i];
            if (mode == VectorMode::Average) {
                for (auto& x : out) x *= 0.5;
            }
            return out;
        }
        case VectorMode::Concat: {
            std::vector<double> out;
            out.reserve(feature.size() + location.size());
            out.insert(out.end(), feature.begin(), feature.end());
            out.insert(out.end(), location.begin(), location.end());
            return out;
        }
        case VectorMode::FeatureOnly:
            return {feature.begin(), feature.end()};
        case VectorMode::LocationOnly:
            return {location.begin(), location.end()};
    }
    throw std::invalid_argument("unknown vector mode");
}

std::vector<CheckInVector> vectorize_checkins(const std::vector<CheckIn>& checkins,
                                              const EmbeddingSpace* feature_space,
                                              const EmbeddingSpace* location_space,
                                              VectorMode mode, const CivilClock& clock,
                                              VectorizeStats* stats) {
    const bool need_feature = mode != VectorMode::LocationOnly;
    const bool need_location = mode != VectorMode::FeatureOnly;
    if (need_feature && feature_space == nullptr) {
        throw std::invalid_argument("vector mode requires the feature space");
    }
    if (need_location && location_space == nullptr) {
        throw std::invalid_argument("vector mode requires the location space");
    }
    VectorizeStats local;
    std::vector<CheckInVector> out;
    out.reserve(checkins.size());
    for (const auto& c : checkins) {
        const Timeslot slot = discretize_time(c.epoch_seconds, clock);
        const std::string fw = make_feature_word(c.category, slot);
        std::span<const double> fvec, lvec;
        if (need_feature) {
            fvec = feature_space->vector_for(fw);
            if (fvec.empty()) {
                ++local.missing_feature;
                continue;
            }
        }
        if (need_location) {
            lvec = location_space->vector_for(c.venue_id);
            if (lvec.empty()) {
                ++local.missing_location;
                continue;
            }
        }
        CheckInVector cv;
        cv.vec = combine_vectors(fvec, lvec, mode);
        cv.user_id = c.user_id;
        cv.feature_word = fw;
        cv.location_word = c.venue_id;
        cv.category = c.category;
        cv.slot = slot;
        cv.coords = {c.lat, c.lon};
        cv.epoch_seconds = c.epoch_seconds;
        out.push_back(std::move(cv));
        ++local.produced;
    }
    if (stats) *stats = local;
    return out;
}

std::vector<double> mean_vector(const std::vector<const std::vector<double>*>& vectors) {
    if (vectors.empty()) throw std::invalid_argument("mean of empty vector list");
    std::vector<double> mean(vectors.front()->size(), 0.0);
    for (const auto* v : vectors) {
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += (*v)[i];
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

const UserTimeslotProfile* UserProfiles::slot_profile(Timeslot slot) const {
    for (const auto& p : by_slot) {
        if (p.slot == slot) return &p;
    }
    return nullptr;
}

std::vector<LocationProfile> build_location_profiles(const std::vector<CheckInVector>& checkins) {
    std::map<std::string, std::vector<const CheckInVector*>> by_venue;
    for (const auto& c : checkins) by_venue[c.location_word].push_back(&c);

    std::vector<LocationProfile> out;
    out.reserve(by_venue.size());
    for (const auto& [venue, group] : by_venue) {
        LocationProfile p;
        p.venue_id = venue;
        p.count = group.size();
        std::vector<const std::vector<double>*> vecs;
        vecs.reserve(group.size());
        std::map<std::string, size_t> category_count;
        double lat = 0, lon = 0;
        for (const auto* c : group) {
            vecs.push_back(&c->vec);
            lat += c->coords.lat;
            lon += c->coords.lon;
            ++category_count[c->category];
        }
        p.vec = mean_vector(vecs);
        p.centroid = {lat / group.size(), lon / group.size()};
        size_t best = 0;
        for (const auto& [cat, n] : category_count) {
            if (n > best) {  // map order breaks ties lexicographically
                best = n;
                p.dominant_category = cat;
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<UserProfiles> build_user_profiles(const std::vector<CheckInVector>& checkins) {
    std::map<std::string, std::vector<const CheckInVector*>> by_user;
    for (const auto& c : checkins) by_user[c.user_id].push_back(&c);

    std::vector<UserProfiles> out;
    out.reserve(by_user.size());
    for (const auto& [user, group] : by_user) {
        UserProfiles up;
        up.user_id = user;
        up.total_count = group.size();
        std::vector<const std::vector<double>*> all_vecs;
        double lat = 0, lon = 0;
        std::array<std::vector<const CheckInVector*>, kTimeslotCount> slots;
        for (const auto* c : group) {
            all_vecs.push_back(&c->vec);
            lat += c->coords.lat;
            lon += c->coords.lon;
            slots[static_cast<size_t>(c->slot)].push_back(c);
        }
        up.overall_vec = mean_vector(all_vecs);
        up.overall_centroid = {lat / group.size(), lon / group.size()};
        for (size_t s = 0; s < slots.size(); ++s) {
            if (slots[s].empty()) continue;
            UserTimeslotProfile p;
            p.user_id = user;
            p.slot = static_cast<Timeslot>(s);
            p.count = slots[s].size();
            std::vector<const std::vector<double>*> vecs;
            double slat = 0, slon = 0;
            for (const auto* c : slots[s]) {
                vecs.push_back(&c->vec);
                slat += c->coords.lat;
                slon += c->coords.lon;
            }
            p.vec = mean_vector(vecs);
            p.centroid = {slat / slots[s].size(), slon / slots[s].size()};
            up.by_slot.push_back(std::move(p));
        }
        out.push_back(std::move(up));
    }
    return out;
}

namespace {

std::vector<NeighborhoodProfile> group_neighborhood_profiles(
    const std::vector<CheckInVector>& checkins, const NeighborhoodMap& map,
    const CivilClock* clock, size_t* dropped) {
    // Key month by index; -1 pools every month together.
    std::map<std::pair<std::string, int32_t>, std::vector<const CheckInVector*>> groups;
    size_t outside = 0;
    for (const auto& c : checkins) {
        auto id = map.lookup(c.coords.lat, c.coords.lon);
        if (!id) {
            ++outside;
            continue;
        }
        const int32_t month = clock ? month_of(c.epoch_seconds, *clock).index : -1;
        groups[{std::move(*id), month}].push_back(&c);
    }
    std::vector<NeighborhoodProfile> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        NeighborhoodProfile p;
        p.neighborhood_id = key.first;
        p.month = YearMonth{key.second};
        p.count = group.size();
        std::vector<const std::vector<double>*> vecs;
        double lat = 0, lon = 0;
        for (const auto* c : group) {
            vecs.push_back(&c->vec);
            lat += c->coords.lat;
            lon += c->coords.lon;
        }
        p.vec = mean_vector(vecs);
        p.centroid = {lat / group.size(), lon / group.size()};
        out.push_back(std::move(p));
    }
    if (dropped) *dropped = outside;
    return out;
}

}  // namespace

std::vector<NeighborhoodProfile> build_neighborhood_profiles(
    const std::vector<CheckInVector>& checkins, const NeighborhoodMap& map,
    const CivilClock& clock, size_t* dropped) {
    return group_neighborhood_profiles(checkins, map, &clock, dropped);
}

std::vector<NeighborhoodProfile> build_neighborhood_profiles_all_months(
    const std::vector<CheckInVector>& checkins, const NeighborhoodMap& map, size_t* dropped) {
    return group_neighborhood_profiles(checkins, map, nullptr, dropped);
}

namespace {

void append_vector(std::ostringstream& out, const std::vector<double>& vec) {
    char buf[32];
    for (size_t i = 0; i < vec.size(); ++i) {
        std::snprintf(buf, sizeof(buf), i == 0 ? "%.17g" : " %.17g", vec[i]);
        out << buf;
    }
}

void append_coords(std::ostringstream& out, const GeoPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "\t%.17g\t%.17g\n", p.lat, p.lon);
    out << buf;
}

}  // namespace

std::string profiles_to_text(const std::vector<LocationProfile>& profiles) {
    std::ostringstream out;
    for (const auto& p : profiles) {
        out << p.venue_id << "\t-\t";
        append_vector(out, p.vec);
        append_coords(out, p.centroid);
    }
    return out.str();
}

std::string profiles_to_text(const std::vector<UserProfiles>& profiles) {
    std::ostringstream out;
    for (const auto& up : profiles) {
        for (const auto& p : up.by_slot) {
            out << p.user_id << '\t' << to_string(p.slot) << '\t';
            append_vector(out, p.vec);
            append_coords(out, p.centroid);
        }
    }
    return out.str();
}

std::string profiles_to_text(const std::vector<NeighborhoodProfile>& profiles) {
    std::ostringstream out;
    for (const auto& p : profiles) {
        out << p.neighborhood_id << '\t';
        if (p.month.index >= 0) {
            out << to_string(p.month);
        } else {
            out << '-';
        }
        out << '\t';
        append_vector(out, p.vec);
        append_coords(out, p.centroid);
    }
    return out.str();
}

}  // namespace stes
