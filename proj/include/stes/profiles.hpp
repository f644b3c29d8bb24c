#pragma once

#include <string>
#include <vector>

#include "stes/checkin.hpp"
#include "stes/embedding.hpp"
#include "stes/geo.hpp"
#include "stes/sequences.hpp"

namespace stes {

// How a check-in's feature-word and location-word vectors fuse into one
// vector. Sum is the default; the others exist for ablations.
enum class VectorMode { Sum, Average, Concat, FeatureOnly, LocationOnly };

std::string_view to_string(VectorMode mode);
std::optional<VectorMode> vector_mode_from_string(std::string_view name);

std::vector<double> combine_vectors(std::span<const double> feature,
                                    std::span<const double> location, VectorMode mode);

// One vectorized check-in with enough provenance for profiling and ranking.
struct CheckInVector {
    std::vector<double> vec;
    std::string user_id;
    std::string feature_word;
    std::string location_word;
    std::string category;
    Timeslot slot = Timeslot::Morning;
    GeoPoint coords;
    int64_t epoch_seconds = 0;
};

struct VectorizeStats {
    size_t produced = 0;
    size_t missing_feature = 0;
    size_t missing_location = 0;
};

// Builds check-in vectors from the trained spaces. Pass nullptr for the space
// a mode does not use. Check-ins whose tokens are missing from a required
// space are skipped and counted.
std::vector<CheckInVector> vectorize_checkins(const std::vector<CheckIn>& checkins,
                                              const EmbeddingSpace* feature_space,
                                              const EmbeddingSpace* location_space,
                                              VectorMode mode, const CivilClock& clock,
                                              VectorizeStats* stats = nullptr);

struct LocationProfile {
    std::string venue_id;
    std::vector<double> vec;  // mean of the venue's check-in vectors
    size_t count = 0;         // M
    GeoPoint centroid;
    std::string dominant_category;  // most frequent, ties lexicographic
};

struct UserTimeslotProfile {
    std::string user_id;
    Timeslot slot = Timeslot::Morning;
    std::vector<double> vec;
    GeoPoint centroid;
    size_t count = 0;
};

struct UserProfiles {
    std::string user_id;
    std::vector<UserTimeslotProfile> by_slot;  // non-empty slots only, <= 10
    std::vector<double> overall_vec;           // fallback for empty query slots
    GeoPoint overall_centroid;
    size_t total_count = 0;

    const UserTimeslotProfile* slot_profile(Timeslot slot) const;
};

struct NeighborhoodProfile {
    std::string neighborhood_id;
    YearMonth month;
    std::vector<double> vec;
    size_t count = 0;
    GeoPoint centroid;
};

std::vector<double> mean_vector(const std::vector<const std::vector<double>*>& vectors);

std::vector<LocationProfile> build_location_profiles(const std::vector<CheckInVector>& checkins);
std::vector<UserProfiles> build_user_profiles(const std::vector<CheckInVector>& checkins);

// Per (neighborhood, month); check-ins outside all polygons are skipped and
// counted in `dropped`.
std::vector<NeighborhoodProfile> build_neighborhood_profiles(
    const std::vector<CheckInVector>& checkins, const NeighborhoodMap& map,
    const CivilClock& clock, size_t* dropped = nullptr);

// Month-agnostic variant used by zoning: one profile per neighborhood.
std::vector<NeighborhoodProfile> build_neighborhood_profiles_all_months(
    const std::vector<CheckInVector>& checkins, const NeighborhoodMap& map,
    size_t* dropped = nullptr);

// Text export, one line per profile:
// entity_id <TAB> timeslot|month|- <TAB> N floats (space-separated) <TAB> lat <TAB> lon
std::string profiles_to_text(const std::vector<LocationProfile>& profiles);
std::string profiles_to_text(const std::vector<UserProfiles>& profiles);
std::string profiles_to_text(const std::vector<NeighborhoodProfile>& profiles);

}  // namespace stes
