#pragma once

#include <string>
#include <vector>

#include "stes/analysis.hpp"
#include "stes/crime.hpp"
#include "stes/metrics.hpp"
#include "stes/recommend.hpp"
#include "stes/synth.hpp"

namespace stes {

enum class Pipeline { Recommend, Zone, Crime };

std::string_view to_string(Pipeline p);
std::optional<Pipeline> pipeline_from_string(std::string_view name);

// Full STES plus the ablation variants: V1 feature words only, V2 location
// words only, V3 spatial decay from the most recent check-in, V4 feature
// embeddings trained against location-word outputs, V5 two-round training.
enum class StesVariant { Full, V1, V2, V3, V4, V5 };

std::string_view to_string(StesVariant v);
std::optional<StesVariant> variant_from_string(std::string_view name);

struct ExperimentConfig {
    Pipeline pipeline = Pipeline::Recommend;
    bool synthetic = true;
    SynthConfig synth;
    std::string checkins_path;
    std::string polygons_path;
    std::string polygons_id_property = "GEOID";
    std::string crimes_path;
    std::string transfer_from;  // feature model ported from a reference city
    std::string offense_filter = "GRAND LARCENY";
    int utc_offset_minutes = 0;  // clock for file-based data

    size_t min_posts = 10;
    double split_ratio = 0.8;
    TrainConfig train;
    StesConfig stes;
    StesVariant variant = StesVariant::Full;
    int zone_k = 4;
    KMeansConfig kmeans;
    CrimeThresholds thresholds;
    ForestConfig forest;
    int test_months = 2;  // crime: trailing feature months in the test set
};

struct ExperimentReport {
    std::string method;
    std::vector<std::pair<std::string, double>> metrics;
    std::string fingerprint;
    double runtime_seconds = 0.0;

    double metric(const std::string& key) const;
    bool has_metric(const std::string& key) const;
    std::string to_text() const;
    std::string to_kv() const;  // stable machine-readable key=value lines
};

// preprocess -> sequences -> train -> profiles -> task -> metrics
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Builds a recommender for one variant over already-split data; exposed for
// oracle tests that need the intermediate pieces.
struct RecommenderBundle {
    EmbeddingSpace feature_space;
    EmbeddingSpace location_space;
    bool has_feature = false;
    bool has_location = false;
    std::vector<CheckInVector> train_vectors;
    Recommender recommender;
};

RecommenderBundle build_recommender(const std::vector<CheckIn>& train_checkins,
                                    const CivilClock& clock, const TrainConfig& train_cfg,
                                    const StesConfig& stes_cfg, StesVariant variant,
                                    const EmbeddingSpace* transferred_feature = nullptr);

uint64_t fnv1a64(const std::string& data);

}  // namespace stes
