#include "stes/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "stes/geo.hpp"
#include "stes/recommend.hpp"

namespace stes {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("series length mismatch");
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("need >= 2 observations");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::nan("");  // constant series
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Regularized incomplete beta by Lentz's continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

double correlation_p_value(double r, size_t n) {
    if (n < 3 || std::isnan(r)) return std::nan("");
    if (std::abs(r) >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t2 = r * r * df / (1.0 - r * r);
    return incbeta(df / 2.0, 0.5, df / (df + t2));
}

std::string top_level_category(const std::string& category) {
    const size_t pos = category.find('_');
    return pos == std::string::npos ? category : category.substr(0, pos);
}

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

HeatmapResult heatmap_stats(const EmbeddingSpace& feature_space, HeatmapAxis axis) {
    std::map<std::string, std::vector<int32_t>> groups;
    for (int32_t w = 0; w < feature_space.vocab_size(); ++w) {
        const auto parts = parse_feature_word(feature_space.vocab().token(w));
        if (!parts) continue;
        const std::string key = axis == HeatmapAxis::Category
                                    ? top_level_category(parts->category)
                                    : std::string(to_string(parts->slot));
        groups[key].push_back(w);
    }
    HeatmapResult result;
    for (const auto& [key, members] : groups) {
        if (!members.empty()) result.labels.push_back(key);
    }
    const size_t g = result.labels.size();
    result.mean_cosine.assign(g, std::vector<double>(g, 0.0));
    result.mean_euclidean.assign(g, std::vector<double>(g, 0.0));

    // Global Euclidean range over every pair considered, for normalization.
    double min_euc = 1e300, max_euc = -1e300;
    std::vector<std::vector<std::pair<double, double>>> sums(
        g, std::vector<std::pair<double, double>>(g, {0.0, 0.0}));
    std::vector<std::vector<size_t>> counts(g, std::vector<size_t>(g, 0));

    auto accumulate_pair = [&](size_t gi, size_t gj, int32_t a, int32_t b) {
        const auto va = feature_space.input_vector(a);
        const auto vb = feature_space.input_vector(b);
        const double cos = cosine(va, vb);
        const double euc = euclidean(va, vb);
        sums[gi][gj].first += cos;
        sums[gi][gj].second += euc;
        ++counts[gi][gj];
        if (gi != gj) {
            sums[gj][gi].first += cos;
            sums[gj][gi].second += euc;
            ++counts[gj][gi];
        }
        min_euc = std::min(min_euc, euc);
        max_euc = std::max(max_euc, euc);
    };

    for (size_t gi = 0; gi < g; ++gi) {
        const auto& mi = groups[result.labels[gi]];
        // Intra-group: unordered pairs; a single-member group pairs with
        // itself so its diagonal stays defined.
        if (mi.size() == 1) {
            accumulate_pair(gi, gi, mi[0], mi[0]);
        } else {
            for (size_t a = 0; a < mi.size(); ++a) {
                for (size_t b = a + 1; b < mi.size(); ++b) accumulate_pair(gi, gi, mi[a], mi[b]);
            }
        }
        for (size_t gj = gi + 1; gj < g; ++gj) {
            const auto& mj = groups[result.labels[gj]];
            for (int32_t a : mi) {
                for (int32_t b : mj) accumulate_pair(gi, gj, a, b);
            }
        }
    }
    const double range = max_euc - min_euc;
    for (size_t i = 0; i < g; ++i) {
        for (size_t j = 0; j < g; ++j) {
            if (counts[i][j] == 0) continue;
            result.mean_cosine[i][j] = sums[i][j].first / counts[i][j];
            const double mean_euc = sums[i][j].second / counts[i][j];
            result.mean_euclidean[i][j] = range > 0 ? (mean_euc - min_euc) / range : 0.0;
        }
    }
    return result;
}

namespace {

CorrelationReport correlate_triples(const std::vector<std::array<double, 3>>& triples) {
    CorrelationReport report;
    report.pairs = triples.size();
    if (triples.size() < 2) return report;
    std::vector<double> dist, cos, euc;
    dist.reserve(triples.size());
    cos.reserve(triples.size());
    euc.reserve(triples.size());
    for (const auto& t : triples) {
        dist.push_back(t[0]);
        cos.push_back(t[1]);
        euc.push_back(t[2]);
    }
    auto opt = [](double v) -> std::optional<double> {
        if (std::isnan(v)) return std::nullopt;
        return v;
    };
    report.pearson_cosine = opt(pearson(dist, cos));
    report.spearman_cosine = opt(spearman(dist, cos));
    report.pearson_euclidean = opt(pearson(dist, euc));
    report.spearman_euclidean = opt(spearman(dist, euc));
    if (report.pearson_cosine) {
        report.p_pearson_cosine = correlation_p_value(*report.pearson_cosine, triples.size());
    }
    if (report.spearman_cosine) {
        report.p_spearman_cosine = correlation_p_value(*report.spearman_cosine, triples.size());
    }
    return report;
}

}  // namespace

DistanceSimilarity distance_correlation(const EmbeddingSpace& location_space,
                                        const std::vector<LocationProfile>& venues,
                                        const PairStatsConfig& cfg) {
    struct Entry {
        std::span<const double> vec;
        GeoPoint coords;
    };
    std::vector<Entry> entries;
    entries.reserve(venues.size());
    for (const auto& v : venues) {
        const auto vec = location_space.vector_for(v.venue_id);
        if (!vec.empty()) entries.push_back({vec, v.centroid});
    }
    const size_t n = entries.size();
    if (n < 2) throw std::invalid_argument("distance correlation needs >= 2 located venues");

    std::vector<std::array<double, 3>> triples;
    auto add_pair = [&](size_t i, size_t j) {
        const double d = haversine_km(entries[i].coords, entries[j].coords);
        const double cos = cosine(entries[i].vec, entries[j].vec);
        const double euc = euclidean(entries[i].vec, entries[j].vec);
        triples.push_back({d, cos, euc});
    };
    const size_t total = n * (n - 1) / 2;
    if (total <= cfg.max_pairs) {
        triples.reserve(total);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) add_pair(i, j);
        }
    } else {
        triples.reserve(cfg.max_pairs);
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<size_t> pick(0, n - 1);
        for (size_t s = 0; s < cfg.max_pairs; ++s) {
            size_t i = pick(rng), j = pick(rng);
            while (j == i) j = pick(rng);
            add_pair(i, j);
        }
    }

    // Normalize Euclidean distances by the global range of this run.
    double min_euc = 1e300, max_euc = -1e300;
    for (const auto& t : triples) {
        min_euc = std::min(min_euc, t[2]);
        max_euc = std::max(max_euc, t[2]);
    }
    const double range = max_euc - min_euc;
    if (range > 0) {
        for (auto& t : triples) t[2] = (t[2] - min_euc) / range;
    } else {
        for (auto& t : triples) t[2] = 0.0;
    }

    DistanceSimilarity result;
    result.global = correlate_triples(triples);
    std::vector<std::array<double, 3>> near;
    for (const auto& t : triples) {
        if (t[0] <= cfg.near_km) near.push_back(t);
    }
    result.near = correlate_triples(near);

    std::sort(triples.begin(), triples.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    for (size_t start = 0; start < triples.size(); start += cfg.segment) {
        const size_t end = std::min(triples.size(), start + cfg.segment);
        double d = 0, c = 0, e = 0;
        for (size_t i = start; i < end; ++i) {
            d += triples[i][0];
            c += triples[i][1];
            e += triples[i][2];
        }
        const double m = static_cast<double>(end - start);
        result.segments.push_back({d / m, c / m, e / m});
    }
    return result;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct LloydResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

LloydResult lloyd_once(const std::vector<std::vector<double>>& points, int k,
                       const KMeansConfig& cfg, uint64_t seed) {
    const size_t n = points.size();
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<size_t> uniform(0, n - 1);
    centroids.push_back(points[uniform(rng)]);
    std::vector<double> d2(n, 0.0);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = 1e300;
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        size_t chosen;
        if (total <= 0.0) {
            chosen = uniform(rng);
        } else {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            chosen = n - 1;
            for (size_t i = 0; i < n; ++i) {
                target -= d2[i];
                if (target <= 0) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(points[chosen]);
    }

    std::vector<int> labels(n, 0);
    double prev_inertia = 1e300;
    double inertia = 0.0;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        inertia = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = 1e300;
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            labels[i] = best_c;
            inertia += best;
        }
        std::vector<std::vector<double>> sums(k, std::vector<double>(points[0].size(), 0.0));
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (size_t d = 0; d < points[i].size(); ++d) sums[labels[i]][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed an empty cluster at the point farthest from its centroid.
                size_t far = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points[i], centroids[labels[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[c] = points[far];
                labels[far] = c;
            } else {
                for (size_t d = 0; d < sums[c].size(); ++d) {
                    centroids[c][d] = sums[c][d] / counts[c];
                }
            }
        }
        if (prev_inertia - inertia <= cfg.tolerance * std::max(prev_inertia, 1e-30) &&
            iter > 0) {
            break;
        }
        prev_inertia = inertia;
    }
    // Final assignment against the converged centroids.
    inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double best = 1e300;
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            const double d = sq_dist(points[i], centroids[c]);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        labels[i] = best_c;
        inertia += best;
    }
    return {std::move(labels), std::move(centroids), inertia};
}

}  // namespace

Clustering kmeans(const std::vector<std::string>& ids,
                  const std::vector<std::vector<double>>& points, int k,
                  const KMeansConfig& cfg) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (points.size() < static_cast<size_t>(k)) {
        throw std::invalid_argument("k exceeds the number of points");
    }
    if (ids.size() != points.size()) throw std::invalid_argument("ids/points size mismatch");

    LloydResult best;
    bool have = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        LloydResult run = lloyd_once(points, k, cfg, cfg.seed + static_cast<uint64_t>(r));
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }
    Clustering result;
    result.ids = ids;
    result.labels = std::move(best.labels);
    result.k = k;
    result.centroids = std::move(best.centroids);
    result.inertia = best.inertia;
    return result;
}

Clustering kmeans(const std::vector<NeighborhoodProfile>& profiles, int k,
                  const KMeansConfig& cfg) {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> points;
    ids.reserve(profiles.size());
    points.reserve(profiles.size());
    for (const auto& p : profiles) {
        ids.push_back(p.neighborhood_id);
        points.push_back(p.vec);
    }
    return kmeans(ids, points, k, cfg);
}

double silhouette(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels) {
    const size_t n = points.size();
    if (labels.size() != n) throw std::invalid_argument("labels/points size mismatch");
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    if (k < 2) throw std::invalid_argument("silhouette needs k >= 2");
    std::vector<size_t> cluster_size(k, 0);
    for (int l : labels) ++cluster_size[l];

    double total = 0.0;
    std::vector<double> mean_dist(k);
    for (size_t i = 0; i < n; ++i) {
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[labels[j]] += std::sqrt(sq_dist(points[i], points[j]));
        }
        const int own = labels[i];
        if (cluster_size[own] <= 1) continue;  // singleton silhouette is 0
        const double a = mean_dist[own] / static_cast<double>(cluster_size[own] - 1);
        double b = 1e300;
        for (int c = 0; c < k; ++c) {
            if (c == own || cluster_size[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(cluster_size[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) throw std::invalid_argument("label length mismatch");
    const size_t n = labels_a.size();
    if (n < 2) throw std::invalid_argument("ARI needs >= 2 points");
    std::map<int, int> map_a, map_b;
    for (int l : labels_a) map_a.emplace(l, static_cast<int>(map_a.size()));
    for (int l : labels_b) map_b.emplace(l, static_cast<int>(map_b.size()));
    const size_t ka = map_a.size(), kb = map_b.size();
    std::vector<std::vector<int64_t>> table(ka, std::vector<int64_t>(kb, 0));
    std::vector<int64_t> row(ka, 0), col(kb, 0);
    for (size_t i = 0; i < n; ++i) {
        const int a = map_a[labels_a[i]];
        const int b = map_b[labels_b[i]];
        ++table[a][b];
        ++row[a];
        ++col[b];
    }
    auto comb2 = [](int64_t m) { return static_cast<double>(m) * (m - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (size_t i = 0; i < ka; ++i) {
        for (size_t j = 0; j < kb; ++j) sum_ij += comb2(table[i][j]);
    }
    for (int64_t r : row) sum_a += comb2(r);
    for (int64_t c : col) sum_b += comb2(c);
    const double expected = sum_a * sum_b / comb2(static_cast<int64_t>(n));
    const double denom = 0.5 * (sum_a + sum_b) - expected;
    if (denom == 0.0) return 1.0;  // both partitions degenerate and identical
    return (sum_ij - expected) / denom;
}

GroundTruthFeatures ground_truth_features(const std::vector<CheckInVector>& checkins,
                                          const NeighborhoodMap& map, int alternative) {
    if (alternative != 1 && alternative != 2) {
        throw std::invalid_argument("ground truth alternative must be 1 or 2");
    }
    std::map<std::string, std::map<std::string, double>> counts;
    for (const auto& c : checkins) {
        auto id = map.lookup(c.coords.lat, c.coords.lon);
        if (!id) continue;
        const std::string key =
            alternative == 1 ? c.feature_word : top_level_category(c.category);
        counts[*id][key] += 1.0;
    }
    std::map<std::string, size_t> columns;
    for (const auto& [_, row] : counts) {
        for (const auto& [key, __] : row) columns.emplace(key, 0);
    }
    size_t idx = 0;
    for (auto& [_, i] : columns) i = idx++;

    GroundTruthFeatures result;
    for (const auto& [key, _] : columns) result.columns.push_back(key);
    for (const auto& [id, row] : counts) {
        std::vector<double> vec(columns.size(), 0.0);
        double norm = 0.0;
        for (const auto& [key, count] : row) {
            vec[columns[key]] = count;
            norm += count * count;
        }
        norm = std::sqrt(norm);
        if (norm > 0) {
            for (auto& x : vec) x /= norm;
        }
        result.ids.push_back(id);
        result.vectors.push_back(std::move(vec));
    }
    return result;
}

ClusterComposition cluster_composition(const Clustering& clustering,
                                       const std::vector<CheckInVector>& checkins,
                                       const NeighborhoodMap& map) {
    std::unordered_map<std::string, int> label_of;
    for (size_t i = 0; i < clustering.ids.size(); ++i) {
        label_of[clustering.ids[i]] = clustering.labels[i];
    }
    std::map<std::string, size_t> categories;
    std::vector<std::map<std::string, double>> tallies(clustering.k);
    for (const auto& c : checkins) {
        auto id = map.lookup(c.coords.lat, c.coords.lon);
        if (!id) continue;
        auto it = label_of.find(*id);
        if (it == label_of.end()) continue;
        const std::string top = top_level_category(c.category);
        categories.emplace(top, 0);
        tallies[it->second][top] += 1.0;
    }
    size_t idx = 0;
    for (auto& [_, i] : categories) i = idx++;

    ClusterComposition result;
    for (const auto& [cat, _] : categories) result.categories.push_back(cat);
    result.ratios.assign(clustering.k, std::vector<double>(categories.size(), 0.0));
    for (int c = 0; c < clustering.k; ++c) {
        double total = 0.0;
        for (const auto& [_, count] : tallies[c]) total += count;
        if (total <= 0) continue;
        for (const auto& [cat, count] : tallies[c]) {
            result.ratios[c][categories[cat]] = count / total;
        }
    }
    return result;
}

}  // namespace stes
