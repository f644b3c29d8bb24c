#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stes/checkin.hpp"
#include "stes/embedding.hpp"
#include "stes/profiles.hpp"

namespace stes {

// --- correlation primitives ---

double pearson(const std::vector<double>& x, const std::vector<double>& y);
// Average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
// Two-sided p-value via the t approximation with n-2 degrees of freedom.
double correlation_p_value(double r, size_t n);

// --- feature-word heatmaps ---

enum class HeatmapAxis { Category, Timeslot };

struct HeatmapResult {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> mean_cosine;
    std::vector<std::vector<double>> mean_euclidean;  // normalized by global range
};

// Mean pairwise cosine / range-normalized Euclidean between the axis groups
// of feature-word vectors. Group labels are top-level categories (prefix
// before the first '_' of the category part) or timeslot names.
HeatmapResult heatmap_stats(const EmbeddingSpace& feature_space, HeatmapAxis axis);

// --- location distance vs similarity ---

struct CorrelationReport {
    size_t pairs = 0;
    std::optional<double> pearson_cosine;
    std::optional<double> spearman_cosine;
    std::optional<double> pearson_euclidean;
    std::optional<double> spearman_euclidean;
    std::optional<double> p_pearson_cosine;
    std::optional<double> p_spearman_cosine;
};

struct PairStatsConfig {
    size_t max_pairs = 2'000'000;  // uniform sample cap for the quadratic scan
    uint64_t seed = 42;
    double near_km = 10.0;
    size_t segment = 500;  // segment length for the mean-curve export
};

struct DistanceSimilarity {
    CorrelationReport global;
    CorrelationReport near;  // pairs within near_km
    // Segment means over pairs sorted by geographic distance:
    // (mean km, mean cosine, mean normalized Euclidean) per segment.
    std::vector<std::array<double, 3>> segments;
};

// Location geographic distance vs embedding similarity, globally and within
// near_km. Venue coordinates come from the matching location profiles.
DistanceSimilarity distance_correlation(const EmbeddingSpace& location_space,
                                        const std::vector<LocationProfile>& venues,
                                        const PairStatsConfig& cfg = {});

// --- clustering ---

struct Clustering {
    std::vector<std::string> ids;
    std::vector<int> labels;
    int k = 0;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

struct KMeansConfig {
    int restarts = 20;
    int max_iterations = 300;
    double tolerance = 1e-6;  // relative inertia change
    uint64_t seed = 42;
};

// Lloyd's algorithm with k-means++ seeding; best inertia over restarts.
Clustering kmeans(const std::vector<std::string>& ids,
                  const std::vector<std::vector<double>>& points, int k,
                  const KMeansConfig& cfg = {});

Clustering kmeans(const std::vector<NeighborhoodProfile>& profiles, int k,
                  const KMeansConfig& cfg = {});

// Mean silhouette with Euclidean distances; singleton clusters score 0.
double silhouette(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels);

// Pair-counting adjusted Rand index with chance correction.
double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

// --- zoning ground truth and composition ---

// l2-normalized count vector per neighborhood: alternative 1 counts feature
// words, alternative 2 counts top-level venue categories.
struct GroundTruthFeatures {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vectors;
    std::vector<std::string> columns;
};

GroundTruthFeatures ground_truth_features(const std::vector<CheckInVector>& checkins,
                                          const NeighborhoodMap& map, int alternative);

// Per-cluster fraction of check-ins by top-level category; rows sum to 1.
struct ClusterComposition {
    std::vector<std::string> categories;
    std::vector<std::vector<double>> ratios;  // [cluster][category]
};

ClusterComposition cluster_composition(const Clustering& clustering,
                                       const std::vector<CheckInVector>& checkins,
                                       const NeighborhoodMap& map);

// Top-level category = prefix before the first '_' in the category string
// (synthetic corpora use flat names, which pass through unchanged).
std::string top_level_category(const std::string& category);

}  // namespace stes
