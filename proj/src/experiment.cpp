#include "stes/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stes/preprocess.hpp"

namespace stes {

std::string_view to_string(Pipeline p) {
    switch (p) {
        case Pipeline::Recommend: return "recommend";
        case Pipeline::Zone: return "zone";
        case Pipeline::Crime: return "crime";
    }
    return "recommend";
}

std::optional<Pipeline> pipeline_from_string(std::string_view name) {
    if (name == "recommend") return Pipeline::Recommend;
    if (name == "zone") return Pipeline::Zone;
    if (name == "crime") return Pipeline::Crime;
    return std::nullopt;
}

std::string_view to_string(StesVariant v) {
    switch (v) {
        case StesVariant::Full: return "full";
        case StesVariant::V1: return "v1";
        case StesVariant::V2: return "v2";
        case StesVariant::V3: return "v3";
        case StesVariant::V4: return "v4";
        case StesVariant::V5: return "v5";
    }
    return "full";
}

std::optional<StesVariant> variant_from_string(std::string_view name) {
    if (name == "full") return StesVariant::Full;
    if (name == "v1") return StesVariant::V1;
    if (name == "v2") return StesVariant::V2;
    if (name == "v3") return StesVariant::V3;
    if (name == "v4") return StesVariant::V4;
    if (name == "v5") return StesVariant::V5;
    return std::nullopt;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double ExperimentReport::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return v;
    }
    throw std::out_of_range("no such metric: " + key);
}

bool ExperimentReport::has_metric(const std::string& key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return true;
    }
    return false;
}

std::string ExperimentReport::to_text() const {
    std::ostringstream out;
    out << "method: " << method << "\n";
    out << "fingerprint: " << fingerprint << "\n";
    char buf[64];
    for (const auto& [k, v] : metrics) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        out << "  " << k << " = " << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%.2f", runtime_seconds);
    out << "runtime_seconds: " << buf << "\n";
    return out.str();
}

std::string ExperimentReport::to_kv() const {
    std::ostringstream out;
    out << "method=" << method << "\n";
    out << "fingerprint=" << fingerprint << "\n";
    char buf[64];
    for (const auto& [k, v] : metrics) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << k << "=" << buf << "\n";
    }
    return out.str();
}

namespace {

VectorMode variant_mode(StesVariant v) {
    switch (v) {
        case StesVariant::V1:
        case StesVariant::V4:
        case StesVariant::V5:
            return VectorMode::FeatureOnly;
        case StesVariant::V2:
            return VectorMode::LocationOnly;
        default:
            return VectorMode::Sum;
    }
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    return hex;
}

std::string fingerprint_config(const ExperimentConfig& cfg) {
    std::ostringstream s;
    s << to_string(cfg.pipeline) << '|' << cfg.synthetic << '|';
    if (cfg.synthetic) {
        const auto& g = cfg.synth;
        s << g.seed << ',' << g.semantics_seed << ',' << g.users << ',' << g.venues << ','
          << g.categories << ',' << g.neighborhoods << ',' << g.zone_types << ','
          << g.archetypes << ',' << g.months << ',' << g.first_year << ',' << g.first_month
          << ',' << g.checkins_per_user_month << ',' << g.cell_km << ',' << g.locality_km << ','
          << g.base_lat << ',' << g.base_lon << ',' << g.crime_scale << ','
          << g.utc_offset_minutes;
    } else {
        s << hash_file(cfg.checkins_path);
        if (!cfg.polygons_path.empty()) s << ',' << hash_file(cfg.polygons_path);
        if (!cfg.crimes_path.empty()) s << ',' << hash_file(cfg.crimes_path);
        s << ',' << cfg.utc_offset_minutes;
    }
    s << '|' << cfg.transfer_from << '|' << cfg.offense_filter << '|' << cfg.min_posts << '|'
      << cfg.split_ratio;
    const auto& t = cfg.train;
    s << '|' << t.dim << ',' << t.window_before << ',' << t.window_after << ',' << t.epochs
      << ',' << t.learning_rate << ',' << t.seed << ',' << t.workers << ','
      << static_cast<int>(t.softmax) << ',' << static_cast<int>(t.output_kind) << ','
      << t.two_round;
    const auto& r = cfg.stes;
    s << '|' << r.preferred_categories << ',' << r.a1 << ',' << r.a2 << ',' << r.b1 << ','
      << r.b2 << ',' << static_cast<int>(r.aggregate);
    for (int k : r.ks) s << ',' << k;
    s << '|' << to_string(cfg.variant) << '|' << cfg.zone_k << '|' << cfg.kmeans.restarts << ','
      << cfg.kmeans.max_iterations << ',' << cfg.kmeans.seed << '|' << cfg.thresholds.high_min
      << '|' << cfg.forest.trees << ',' << cfg.forest.max_depth << ','
      << cfg.forest.features_per_split << ',' << cfg.forest.seed << '|' << cfg.test_months;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(s.str())));
    return hex;
}

struct LoadedData {
    std::vector<CheckIn> checkins;
    std::vector<CrimeRecord> crimes;
    NeighborhoodMap map;
    bool has_map = false;
    CivilClock clock{0};
    const SynthWorld* world = nullptr;
};

LoadedData load_data(const ExperimentConfig& cfg, SynthWorld& world_storage) {
    LoadedData data;
    if (cfg.synthetic) {
        world_storage = generate(cfg.synth);
        data.checkins = world_storage.checkins;
        data.crimes = world_storage.crimes;
        data.map = world_storage.map;
        data.has_map = true;
        data.clock = world_storage.clock;
        data.world = &world_storage;
    } else {
        if (cfg.checkins_path.empty()) {
            throw std::runtime_error("stage=load: a check-in file is required");
        }
        data.checkins = read_checkins_tsv(cfg.checkins_path);
        data.clock = CivilClock(cfg.utc_offset_minutes);
        if (!cfg.polygons_path.empty()) {
            data.map = NeighborhoodMap::from_geojson_file(cfg.polygons_path,
                                                          cfg.polygons_id_property);
            data.has_map = true;
        }
        if (!cfg.crimes_path.empty()) data.crimes = read_crimes_tsv(cfg.crimes_path);
    }
    return data;
}

}  // namespace

RecommenderBundle build_recommender(const std::vector<CheckIn>& train_checkins,
                                    const CivilClock& clock, const TrainConfig& train_cfg,
                                    const StesConfig& stes_cfg, StesVariant variant,
                                    const EmbeddingSpace* transferred_feature) {
    const VectorMode mode = variant_mode(variant);
    const bool need_feature = mode != VectorMode::LocationOnly;
    const bool need_location = mode != VectorMode::FeatureOnly;

    const auto sequences = build_sequences(train_checkins, Grouping::User, clock);

    EmbeddingSpace feature_space, location_space;
    if (need_feature) {
        if (transferred_feature != nullptr) {
            feature_space = *transferred_feature;
        } else {
            TrainConfig fc = train_cfg;
            if (variant == StesVariant::V4) fc.output_kind = OutputKind::CrossLocation;
            if (variant == StesVariant::V5) fc.two_round = true;
            feature_space = train(sequences, WordKind::Feature, fc);
        }
    }
    if (need_location) {
        TrainConfig lc = train_cfg;
        lc.output_kind = OutputKind::Same;
        lc.two_round = false;
        location_space = train(sequences, WordKind::Location, lc);
    }

    auto vectors = vectorize_checkins(train_checkins, need_feature ? &feature_space : nullptr,
                                      need_location ? &location_space : nullptr, mode, clock);
    auto venues = build_location_profiles(vectors);
    auto users = build_user_profiles(vectors);
    const SpatialAnchor anchor = variant == StesVariant::V3 ? SpatialAnchor::MostRecentCheckin
                                                            : SpatialAnchor::SlotCentroid;
    Recommender rec(std::move(venues), std::move(users), vectors, stes_cfg, anchor);
    return RecommenderBundle{std::move(feature_space), std::move(location_space), need_feature,
                             need_location,            std::move(vectors),        std::move(rec)};
}

namespace {

ExperimentReport run_recommend(const ExperimentConfig& cfg, LoadedData& data) {
    ExperimentReport report;
    report.method = std::string("stes-") + std::string(to_string(cfg.variant));
    if (!cfg.transfer_from.empty()) report.method += "+transfer";

    auto cleaned = preprocess(std::move(data.checkins), cfg.min_posts);
    if (cleaned.empty()) throw std::runtime_error("stage=preprocess: no check-ins survive");

    std::vector<CheckIn> train_set, test_set;
    SplitStats split_stats;
    split_train_test(cleaned, cfg.split_ratio, train_set, test_set, &split_stats);
    if (train_set.empty() || test_set.empty()) {
        throw std::runtime_error("stage=split: empty train or test partition");
    }

    EmbeddingSpace transferred;
    const EmbeddingSpace* transferred_ptr = nullptr;
    if (!cfg.transfer_from.empty()) {
        transferred = ModelIO::load(cfg.transfer_from);
        if (transferred.kind() != WordKind::Feature) {
            throw std::runtime_error("stage=transfer: ported model must hold feature words");
        }
        transferred_ptr = &transferred;
    }

    auto bundle = build_recommender(train_set, data.clock, cfg.train, cfg.stes, cfg.variant,
                                    transferred_ptr);

    const int max_k = *std::max_element(cfg.stes.ks.begin(), cfg.stes.ks.end());
    std::vector<TestCase> cases;
    cases.reserve(test_set.size());
    std::set<std::pair<std::string, Timeslot>> queries;
    for (const auto& c : test_set) {
        const Timeslot slot = discretize_time(c.epoch_seconds, data.clock);
        cases.push_back({c.user_id, slot, c.venue_id});
        queries.insert({c.user_id, slot});
    }
    std::vector<QueryResult> results;
    size_t unknown_users = 0;
    for (const auto& [user, slot] : queries) {
        if (!bundle.recommender.has_user(user)) {
            ++unknown_users;
            continue;
        }
        const auto rec = bundle.recommender.recommend(user, slot, max_k);
        QueryResult qr;
        qr.user_id = user;
        qr.slot = slot;
        for (const auto& item : rec.items) qr.ranked_venues.push_back(item.venue_id);
        results.push_back(std::move(qr));
    }

    const auto metrics = metric_suite(results, cases, cfg.stes.ks);
    for (int k : cfg.stes.ks) {
        report.metrics.emplace_back("p_at_" + std::to_string(k), metrics.precision.at(k));
        report.metrics.emplace_back("r_at_" + std::to_string(k), metrics.recall.at(k));
        report.metrics.emplace_back("acc_at_" + std::to_string(k), metrics.accuracy.at(k));
        report.metrics.emplace_back("map_at_" + std::to_string(k), metrics.map.at(k));
    }
    report.metrics.emplace_back("queries", static_cast<double>(metrics.queries));
    report.metrics.emplace_back("queries_skipped", static_cast<double>(metrics.queries_skipped));
    report.metrics.emplace_back("test_cases", static_cast<double>(metrics.test_cases));
    report.metrics.emplace_back("test_cases_skipped",
                                static_cast<double>(metrics.test_cases_skipped));
    report.metrics.emplace_back("unreachable_venues",
                                static_cast<double>(metrics.unreachable_venues));
    report.metrics.emplace_back("unknown_users", static_cast<double>(unknown_users));
    report.metrics.emplace_back("train_checkins", static_cast<double>(train_set.size()));
    report.metrics.emplace_back("test_checkins", static_cast<double>(test_set.size()));
    return report;
}

ExperimentReport run_zone(const ExperimentConfig& cfg, LoadedData& data) {
    if (!data.has_map) throw std::runtime_error("stage=load: zoning requires polygons");
    ExperimentReport report;
    report.method = "zoning-kmeans";

    auto cleaned = preprocess(std::move(data.checkins), cfg.min_posts);
    if (cleaned.empty()) throw std::runtime_error("stage=preprocess: no check-ins survive");

    const auto sequences = build_sequences(cleaned, Grouping::Neighborhood, data.clock,
                                           &data.map);
    if (sequences.empty()) {
        throw std::runtime_error("stage=sequences: no check-in falls inside a polygon");
    }
    auto feature_space = train(sequences, WordKind::Feature, cfg.train);
    auto vectors = vectorize_checkins(cleaned, &feature_space, nullptr, VectorMode::FeatureOnly,
                                      data.clock);
    auto profiles = build_neighborhood_profiles_all_months(vectors, data.map);
    if (static_cast<int>(profiles.size()) < cfg.zone_k) {
        throw std::runtime_error("stage=cluster: fewer populated neighborhoods than k");
    }

    KMeansConfig kmc = cfg.kmeans;
    const auto clustering = kmeans(profiles, cfg.zone_k, kmc);
    std::vector<std::vector<double>> points;
    points.reserve(profiles.size());
    for (const auto& p : profiles) points.push_back(p.vec);
    const double si = silhouette(points, clustering.labels);

    // Ground-truth clustering on l2-normalized feature-word counts.
    const auto gt = ground_truth_features(vectors, data.map, 1);
    const auto gt_clustering = kmeans(gt.ids, gt.vectors, cfg.zone_k, kmc);
    // Align by id (both derive from the same populated neighborhoods).
    std::map<std::string, int> gt_label;
    for (size_t i = 0; i < gt.ids.size(); ++i) gt_label[gt.ids[i]] = gt_clustering.labels[i];
    std::vector<int> ours, theirs;
    for (size_t i = 0; i < clustering.ids.size(); ++i) {
        auto it = gt_label.find(clustering.ids[i]);
        if (it == gt_label.end()) continue;
        ours.push_back(clustering.labels[i]);
        theirs.push_back(it->second);
    }
    const double ari_gt = adjusted_rand(ours, theirs);

    report.metrics.emplace_back("silhouette", si);
    report.metrics.emplace_back("ari_vs_count_gt", ari_gt);
    report.metrics.emplace_back("clusters", cfg.zone_k);
    report.metrics.emplace_back("neighborhoods", static_cast<double>(profiles.size()));

    if (data.world != nullptr) {
        std::map<std::string, int> plant;
        for (size_t i = 0; i < data.world->neighborhood_ids.size(); ++i) {
            plant[data.world->neighborhood_ids[i]] = data.world->zone_of[i];
        }
        std::vector<int> got, want;
        for (size_t i = 0; i < clustering.ids.size(); ++i) {
            auto it = plant.find(clustering.ids[i]);
            if (it == plant.end()) continue;
            got.push_back(clustering.labels[i]);
            want.push_back(it->second);
        }
        report.metrics.emplace_back("ari_vs_plant", adjusted_rand(got, want));
    }
    return report;
}

std::vector<NeighborhoodProfile> monthly_count_profiles(const std::vector<CheckInVector>& vectors,
                                                        const NeighborhoodMap& map,
                                                        const CivilClock& clock) {
    std::map<std::string, size_t> columns;
    for (const auto& v : vectors) columns.emplace(v.feature_word, 0);
    size_t idx = 0;
    for (auto& [_, i] : columns) i = idx++;

    std::map<std::pair<std::string, int32_t>, std::vector<double>> counts;
    for (const auto& v : vectors) {
        auto id = map.lookup(v.coords.lat, v.coords.lon);
        if (!id) continue;
        const auto month = month_of(v.epoch_seconds, clock);
        auto& row = counts[{*id, month.index}];
        if (row.empty()) row.assign(columns.size(), 0.0);
        row[columns[v.feature_word]] += 1.0;
    }
    std::vector<NeighborhoodProfile> out;
    out.reserve(counts.size());
    for (auto& [key, row] : counts) {
        double norm = 0.0;
        for (double x : row) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0) {
            for (auto& x : row) x /= norm;
        }
        NeighborhoodProfile p;
        p.neighborhood_id = key.first;
        p.month = YearMonth{key.second};
        p.vec = std::move(row);
        p.count = 1;
        out.push_back(std::move(p));
    }
    return out;
}

void append_crime_metrics(ExperimentReport& report, const std::string& prefix,
                          const std::vector<LabeledInstance>& train_set,
                          const std::vector<LabeledInstance>& test_set,
                          const std::vector<LabeledInstance>& l2_train,
                          const std::vector<LabeledInstance>& l2_test, TargetLabel target,
                          const ForestConfig& forest_cfg) {
    std::vector<int> truth;
    truth.reserve(test_set.size());
    for (const auto& inst : test_set) truth.push_back(label_value(inst, target));
    std::vector<int> train_truth;
    train_truth.reserve(train_set.size());
    for (const auto& inst : train_set) train_truth.push_back(label_value(inst, target));

    const auto forest = RandomForest::train(train_set, target, forest_cfg);
    const auto pred = forest.predict(test_set);
    const auto eval = evaluate(pred, truth);

    const auto l2_forest = RandomForest::train(l2_train, target, forest_cfg);
    const auto l2_pred = l2_forest.predict(l2_test);
    const auto l2_eval = evaluate(l2_pred, truth);

    const auto majority_pred = random_baseline(train_truth, truth.size());
    const auto majority_eval = evaluate(majority_pred, truth);

    report.metrics.emplace_back(prefix + "_accuracy", eval.accuracy);
    report.metrics.emplace_back(prefix + "_macro_f1", eval.macro_f1);
    report.metrics.emplace_back(prefix + "_l2_accuracy", l2_eval.accuracy);
    report.metrics.emplace_back(prefix + "_l2_macro_f1", l2_eval.macro_f1);
    report.metrics.emplace_back(prefix + "_majority_accuracy", majority_eval.accuracy);
    report.metrics.emplace_back(prefix + "_majority_macro_f1", majority_eval.macro_f1);
    report.metrics.emplace_back(prefix + "_mcnemar_vs_majority",
                                mcnemar_mid_p(pred, majority_pred, truth));
    report.metrics.emplace_back(prefix + "_mcnemar_vs_l2", mcnemar_mid_p(pred, l2_pred, truth));
}

ExperimentReport run_crime(const ExperimentConfig& cfg, LoadedData& data) {
    if (!data.has_map) throw std::runtime_error("stage=load: crime prediction requires polygons");
    if (data.crimes.empty()) throw std::runtime_error("stage=load: crime records required");
    ExperimentReport report;
    report.method = "crime-forest";

    auto cleaned = preprocess(std::move(data.checkins), cfg.min_posts);
    if (cleaned.empty()) throw std::runtime_error("stage=preprocess: no check-ins survive");

    const auto sequences = build_sequences(cleaned, Grouping::Neighborhood, data.clock,
                                           &data.map);
    if (sequences.empty()) {
        throw std::runtime_error("stage=sequences: no check-in falls inside a polygon");
    }
    auto feature_space = train(sequences, WordKind::Feature, cfg.train);
    auto vectors = vectorize_checkins(cleaned, &feature_space, nullptr, VectorMode::FeatureOnly,
                                      data.clock);
    auto profiles = build_neighborhood_profiles(vectors, data.map, data.clock);

    LabelStats label_stats;
    auto instances = label_instances(data.crimes, profiles, data.map, data.clock,
                                     cfg.thresholds, cfg.offense_filter, &label_stats);
    if (instances.empty()) throw std::runtime_error("stage=label: no labeled instances");

    const auto l2_profiles = monthly_count_profiles(vectors, data.map, data.clock);
    auto l2_instances = label_instances(data.crimes, l2_profiles, data.map, data.clock,
                                        cfg.thresholds, cfg.offense_filter);

    int32_t max_month = INT32_MIN;
    for (const auto& inst : instances) max_month = std::max(max_month, inst.month.index);
    const YearMonth first_test{max_month - cfg.test_months + 1};

    std::vector<LabeledInstance> train_set, test_set, l2_train, l2_test;
    split_instances(instances, first_test, train_set, test_set);
    split_instances(l2_instances, first_test, l2_train, l2_test);
    if (train_set.empty() || test_set.empty()) {
        throw std::runtime_error("stage=split: empty train or test months");
    }
    if (!chronological_split_ok(train_set, test_set)) {
        throw std::runtime_error("stage=split: chronological split violated");
    }
    // The l2 baseline must score the same instances in the same order.
    if (l2_train.size() != train_set.size() || l2_test.size() != test_set.size()) {
        throw std::runtime_error("stage=split: baseline instances diverge");
    }

    append_crime_metrics(report, "rate", train_set, test_set, l2_train, l2_test,
                         TargetLabel::Rate, cfg.forest);
    append_crime_metrics(report, "occurrence", train_set, test_set, l2_train, l2_test,
                         TargetLabel::Occurrence, cfg.forest);
    report.metrics.emplace_back("train_instances", static_cast<double>(train_set.size()));
    report.metrics.emplace_back("test_instances", static_cast<double>(test_set.size()));
    report.metrics.emplace_back("instances_skipped_out_of_range",
                                static_cast<double>(label_stats.skipped_out_of_range));
    return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    SynthWorld world_storage;
    LoadedData data = load_data(cfg, world_storage);

    ExperimentReport report;
    switch (cfg.pipeline) {
        case Pipeline::Recommend:
            report = run_recommend(cfg, data);
            break;
        case Pipeline::Zone:
            report = run_zone(cfg, data);
            break;
        case Pipeline::Crime:
            report = run_crime(cfg, data);
            break;
    }
    report.fingerprint = fingerprint_config(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    report.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
    return report;
}

}  // namespace stes
