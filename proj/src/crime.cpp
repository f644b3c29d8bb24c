#include "stes/crime.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace stes {

std::vector<LabeledInstance> label_instances(const std::vector<CrimeRecord>& crimes,
                                             const std::vector<NeighborhoodProfile>& profiles,
                                             const NeighborhoodMap& map, const CivilClock& clock,
                                             const CrimeThresholds& thresholds,
                                             const std::string& offense_filter,
                                             LabelStats* stats) {
    LabelStats local;
    std::map<std::pair<std::string, int32_t>, std::pair<int64_t, int64_t>> counts;  // all, tracked
    int32_t min_month = INT32_MAX, max_month = INT32_MIN;
    for (const auto& crime : crimes) {
        const YearMonth m = month_of(crime.epoch_seconds, clock);
        min_month = std::min(min_month, m.index);
        max_month = std::max(max_month, m.index);
        auto id = map.lookup(crime.lat, crime.lon);
        if (!id) {
            ++local.crimes_outside_polygons;
            continue;
        }
        auto& entry = counts[{std::move(*id), m.index}];
        ++entry.first;
        if (offense_filter.empty() || crime.offense == offense_filter) ++entry.second;
    }

    std::vector<LabeledInstance> out;
    out.reserve(profiles.size());
    for (const auto& p : profiles) {
        const YearMonth next = p.month.next();
        if (next.index < min_month || next.index > max_month) {
            ++local.skipped_out_of_range;
            continue;
        }
        LabeledInstance inst;
        inst.neighborhood_id = p.neighborhood_id;
        inst.month = p.month;
        inst.features = p.vec;
        auto it = counts.find({p.neighborhood_id, next.index});
        const int64_t all = it != counts.end() ? it->second.first : 0;
        const int64_t tracked = it != counts.end() ? it->second.second : 0;
        inst.incident_count = all;
        if (all == 0) {
            inst.rate_label = kRateLow;
        } else if (all < thresholds.high_min) {
            inst.rate_label = kRateMedium;
        } else {
            inst.rate_label = kRateHigh;
        }
        inst.occurrence_label = tracked > 0 ? 1 : 0;
        out.push_back(std::move(inst));
        ++local.instances;
    }
    if (stats) *stats = local;
    return out;
}

void split_instances(const std::vector<LabeledInstance>& instances, YearMonth first_test_month,
                     std::vector<LabeledInstance>& train, std::vector<LabeledInstance>& test) {
    train.clear();
    test.clear();
    for (const auto& inst : instances) {
        (inst.month < first_test_month ? train : test).push_back(inst);
    }
}

bool chronological_split_ok(const std::vector<LabeledInstance>& train,
                            const std::vector<LabeledInstance>& test) {
    if (train.empty() || test.empty()) return true;
    int32_t max_train = INT32_MIN, min_test = INT32_MAX;
    for (const auto& i : train) max_train = std::max(max_train, i.month.index);
    for (const auto& i : test) min_test = std::min(min_test, i.month.index);
    return max_train < min_test;
}

int label_value(const LabeledInstance& inst, TargetLabel target) {
    return target == TargetLabel::Rate ? inst.rate_label : inst.occurrence_label;
}

// Tree node shape shared with the build helpers below.
struct ForestNode {
    int feature = -1;
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    int leaf_class = -1;
};

namespace {

double gini(const std::vector<int64_t>& counts, int64_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

int majority(const std::vector<int64_t>& counts) {
    int best = 0;
    for (size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = static_cast<int>(c);
    }
    return best;
}

struct NodeTask {
    std::vector<int32_t> indices;
    int depth;
    int32_t node_id;
};

void build_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                const std::vector<int32_t>& sample, int classes, int features_per_split,
                int max_depth, int min_samples_split, std::mt19937_64& rng,
                std::vector<ForestNode>& nodes) {
    const int d = static_cast<int>(x[0].size());
    nodes.clear();
    nodes.push_back({});
    std::vector<NodeTask> stack;
    stack.push_back({sample, 0, 0});
    std::vector<int> feature_pool(d);
    for (int i = 0; i < d; ++i) feature_pool[i] = i;

    while (!stack.empty()) {
        NodeTask task = std::move(stack.back());
        stack.pop_back();
        std::vector<int64_t> counts(classes, 0);
        for (int32_t i : task.indices) ++counts[y[i]];
        const int64_t total = static_cast<int64_t>(task.indices.size());
        const double node_gini = gini(counts, total);

        const bool depth_capped = max_depth > 0 && task.depth >= max_depth;
        if (node_gini == 0.0 || total < min_samples_split || depth_capped) {
            nodes[task.node_id].leaf_class = majority(counts);
            continue;
        }

        // Sample features without replacement (partial Fisher-Yates).
        const int m = std::min(d, features_per_split);
        for (int i = 0; i < m; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(feature_pool[i], feature_pool[pick(rng)]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = node_gini;
        std::vector<std::pair<double, int>> values;  // (feature value, class)
        for (int fi = 0; fi < m; ++fi) {
            const int f = feature_pool[fi];
            values.clear();
            values.reserve(task.indices.size());
            for (int32_t i : task.indices) values.emplace_back(x[i][f], y[i]);
            std::sort(values.begin(), values.end());
            std::vector<int64_t> left_counts(classes, 0);
            int64_t left_total = 0;
            for (size_t i = 0; i + 1 < values.size(); ++i) {
                ++left_counts[values[i].second];
                ++left_total;
                if (values[i].first == values[i + 1].first) continue;
                std::vector<int64_t> right_counts(classes);
                for (int c = 0; c < classes; ++c) right_counts[c] = counts[c] - left_counts[c];
                const int64_t right_total = total - left_total;
                const double impurity =
                    (left_total * gini(left_counts, left_total) +
                     right_total * gini(right_counts, right_total)) /
                    static_cast<double>(total);
                if (impurity < best_impurity - 1e-12) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = (values[i].first + values[i + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) {
            nodes[task.node_id].leaf_class = majority(counts);
            continue;
        }

        std::vector<int32_t> left_idx, right_idx;
        for (int32_t i : task.indices) {
            (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) {
            nodes[task.node_id].leaf_class = majority(counts);
            continue;
        }
        const int32_t left_id = static_cast<int32_t>(nodes.size());
        nodes.push_back({});
        const int32_t right_id = static_cast<int32_t>(nodes.size());
        nodes.push_back({});
        nodes[task.node_id].feature = best_feature;
        nodes[task.node_id].threshold = best_threshold;
        nodes[task.node_id].left = left_id;
        nodes[task.node_id].right = right_id;
        stack.push_back({std::move(left_idx), task.depth + 1, left_id});
        stack.push_back({std::move(right_idx), task.depth + 1, right_id});
    }
}

}  // namespace

RandomForest RandomForest::train_xy(std::vector<std::vector<double>> x, std::vector<int> y,
                                    const ForestConfig& cfg) {
    if (x.empty() || x.size() != y.size()) {
        throw std::invalid_argument("training set empty or features/labels mismatched");
    }
    int classes = 0;
    for (int label : y) classes = std::max(classes, label + 1);
    {
        std::vector<int64_t> counts(classes, 0);
        for (int label : y) ++counts[label];
        int present = 0;
        for (int64_t c : counts) present += c > 0 ? 1 : 0;
        if (present < 2) {
            throw std::runtime_error(
                "training set has a single class; a constant baseline is the right tool");
        }
    }
    const int d = static_cast<int>(x[0].size());
    const int per_split = cfg.features_per_split > 0
                              ? cfg.features_per_split
                              : std::max(1, static_cast<int>(std::lround(std::sqrt(d))));

    RandomForest forest;
    forest.classes_ = classes;
    forest.trees_.resize(cfg.trees);
    const size_t n = x.size();
    for (int t = 0; t < cfg.trees; ++t) {
        std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(t + 1));
        std::uniform_int_distribution<size_t> pick(0, n - 1);
        std::vector<int32_t> sample(n);
        for (size_t i = 0; i < n; ++i) sample[i] = static_cast<int32_t>(pick(rng));
        std::vector<ForestNode> nodes;
        build_tree(x, y, sample, classes, per_split, cfg.max_depth, cfg.min_samples_split, rng,
                   nodes);
        auto& tree = forest.trees_[t];
        tree.resize(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) {
            tree[i] = {nodes[i].feature, nodes[i].threshold, nodes[i].left, nodes[i].right,
                       nodes[i].leaf_class};
        }
    }
    return forest;
}

RandomForest RandomForest::train(std::vector<LabeledInstance> instances, TargetLabel target,
                                 const ForestConfig& cfg) {
    // Canonical order so shuffled inputs make the same forest.
    std::sort(instances.begin(), instances.end(),
              [](const LabeledInstance& a, const LabeledInstance& b) {
                  if (a.neighborhood_id != b.neighborhood_id) {
                      return a.neighborhood_id < b.neighborhood_id;
                  }
                  return a.month.index < b.month.index;
              });
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    x.reserve(instances.size());
    y.reserve(instances.size());
    for (auto& inst : instances) {
        x.push_back(std::move(inst.features));
        y.push_back(label_value(inst, target));
    }
    return train_xy(std::move(x), std::move(y), cfg);
}

int RandomForest::predict(const std::vector<double>& features) const {
    std::vector<int64_t> votes(classes_, 0);
    for (const auto& tree : trees_) {
        int32_t node = 0;
        while (tree[node].leaf_class < 0) {
            node = features[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                                        : tree[node].right;
        }
        ++votes[tree[node].leaf_class];
    }
    return majority(votes);
}

std::vector<int> RandomForest::predict(const std::vector<LabeledInstance>& instances) const {
    std::vector<int> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(predict(inst.features));
    return out;
}

EvalResult evaluate(const std::vector<int>& predictions, const std::vector<int>& truth) {
    if (predictions.size() != truth.size() || truth.empty()) {
        throw std::invalid_argument("predictions/truth size mismatch or empty");
    }
    int classes = 0;
    for (int t : truth) classes = std::max(classes, t + 1);
    for (int p : predictions) classes = std::max(classes, p + 1);

    EvalResult result;
    result.confusion.assign(classes, std::vector<int64_t>(classes, 0));
    int64_t correct = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        ++result.confusion[truth[i]][predictions[i]];
        if (truth[i] == predictions[i]) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    result.per_class_f1.resize(classes, 0.0);
    double f1_sum = 0.0;
    for (int c = 0; c < classes; ++c) {
        int64_t tp = result.confusion[c][c];
        int64_t fp = 0, fn = 0;
        for (int o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += result.confusion[o][c];
            fn += result.confusion[c][o];
        }
        const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        result.per_class_f1[c] = f1;
        f1_sum += f1;
    }
    result.macro_f1 = f1_sum / classes;
    return result;
}

namespace {

double log_binom_coeff(int64_t n, int64_t k) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

}  // namespace

double mcnemar_mid_p(const std::vector<int>& pred_a, const std::vector<int>& pred_b,
                     const std::vector<int>& truth) {
    if (pred_a.size() != truth.size() || pred_b.size() != truth.size()) {
        throw std::invalid_argument("prediction/truth lengths differ");
    }
    int64_t b = 0, c = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool a_right = pred_a[i] == truth[i];
        const bool b_right = pred_b[i] == truth[i];
        if (a_right && !b_right) ++b;
        if (!a_right && b_right) ++c;
    }
    const int64_t n = b + c;
    if (n == 0) return 1.0;
    const int64_t m = std::min(b, c);
    const double log_half_n = static_cast<double>(n) * std::log(0.5);
    double tail = 0.0;
    for (int64_t i = 0; i < m; ++i) {
        tail += std::exp(log_binom_coeff(n, i) + log_half_n);
    }
    const double at_m = std::exp(log_binom_coeff(n, m) + log_half_n);
    return std::min(1.0, 2.0 * (tail + 0.5 * at_m));
}

std::vector<int> random_baseline(const std::vector<int>& train_truth, size_t test_size) {
    if (train_truth.empty()) throw std::invalid_argument("empty training labels");
    int classes = 0;
    for (int t : train_truth) classes = std::max(classes, t + 1);
    std::vector<int64_t> counts(classes, 0);
    for (int t : train_truth) ++counts[t];
    return std::vector<int>(test_size, majority(counts));
}

}  // namespace stes
