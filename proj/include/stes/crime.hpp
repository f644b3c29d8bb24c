#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stes/geo.hpp"
#include "stes/io.hpp"
#include "stes/profiles.hpp"
#include "stes/sequences.hpp"

namespace stes {

// Rate classes; values double as class ids.
enum CrimeRate : int { kRateLow = 0, kRateMedium = 1, kRateHigh = 2 };

struct CrimeThresholds {
    // Low: 0 incidents, Medium: (0, high_min), High: >= high_min.
    int64_t high_min = 3;
};

struct LabeledInstance {
    std::string neighborhood_id;
    YearMonth month;  // feature month; labels come from month+1
    std::vector<double> features;
    int rate_label = kRateLow;
    int occurrence_label = 0;  // tracked offense occurred next month
    int64_t incident_count = 0;
};

struct LabelStats {
    size_t instances = 0;
    size_t skipped_out_of_range = 0;  // next month outside the crime data span
    size_t crimes_outside_polygons = 0;
};

// Pairs each (neighborhood, month) profile with next-month crime labels.
// `offense_filter` selects the occurrence-prediction target; empty tracks any
// offense.
std::vector<LabeledInstance> label_instances(const std::vector<CrimeRecord>& crimes,
                                             const std::vector<NeighborhoodProfile>& profiles,
                                             const NeighborhoodMap& map, const CivilClock& clock,
                                             const CrimeThresholds& thresholds,
                                             const std::string& offense_filter = "",
                                             LabelStats* stats = nullptr);

enum class TargetLabel { Rate, Occurrence };

// Chronological split: test = instances whose feature month >= first test
// month.
void split_instances(const std::vector<LabeledInstance>& instances, YearMonth first_test_month,
                     std::vector<LabeledInstance>& train, std::vector<LabeledInstance>& test);

// max train feature month strictly precedes min test feature month
bool chronological_split_ok(const std::vector<LabeledInstance>& train,
                            const std::vector<LabeledInstance>& test);

struct ForestConfig {
    int trees = 200;
    int max_depth = 0;          // 0 = unlimited
    int min_samples_split = 2;
    int features_per_split = 0;  // 0 = round(sqrt(d))
    uint64_t seed = 42;
};

// Bagged gini decision trees. Training canonicalizes instance order by
// (neighborhood, month) before sampling, so input permutations cannot change
// predictions.
class RandomForest {
public:
    static RandomForest train(std::vector<LabeledInstance> instances, TargetLabel target,
                              const ForestConfig& cfg);
    static RandomForest train_xy(std::vector<std::vector<double>> x, std::vector<int> y,
                                 const ForestConfig& cfg);

    int predict(const std::vector<double>& features) const;
    std::vector<int> predict(const std::vector<LabeledInstance>& instances) const;
    int class_count() const { return classes_; }
    size_t tree_count() const { return trees_.size(); }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int32_t left = -1;
        int32_t right = -1;
        int leaf_class = -1;
    };
    std::vector<std::vector<Node>> trees_;
    int classes_ = 0;
};

int label_value(const LabeledInstance& inst, TargetLabel target);

struct EvalResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    std::vector<std::vector<int64_t>> confusion;  // [truth][predicted]
};

EvalResult evaluate(const std::vector<int>& predictions, const std::vector<int>& truth);

// Mid-p McNemar over correctness indicators: b = A right/B wrong, c = A
// wrong/B right; p = 2*(P(X < min(b,c)) + P(X = min(b,c))/2), X ~
// Binomial(b+c, 1/2), capped at 1. b+c = 0 gives 1.
double mcnemar_mid_p(const std::vector<int>& pred_a, const std::vector<int>& pred_b,
                     const std::vector<int>& truth);

// Constant majority-class predictions (ties to the smallest class id).
std::vector<int> random_baseline(const std::vector<int>& train_truth, size_t test_size);

}  // namespace stes
