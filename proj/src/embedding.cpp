#include "stes/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stes/io.hpp"

namespace stes {

double sigmoid(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

void TrainConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");
    if (window_before + window_after < 1) throw std::invalid_argument("window k1+k2 must be >= 1");
    if (window_before < 0 || window_after < 0) throw std::invalid_argument("window sides must be >= 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be > 0");
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
}

EmbeddingSpace::EmbeddingSpace(WordKind kind, Vocabulary vocab, int dim, SoftmaxMode mode)
    : kind_(kind), vocab_(std::move(vocab)), dim_(dim), mode_(mode) {
    input_weights_.assign(static_cast<size_t>(vocab_.size()) * dim_, 0.0);
    attach_output(mode, vocab_, false);
}

void EmbeddingSpace::attach_output(SoftmaxMode mode, const Vocabulary& output_vocab, bool cross) {
    mode_ = mode;
    cross_output_ = cross;
    output_vocab_size_ = output_vocab.size();
    if (cross) output_vocab_ = output_vocab;
    if (mode == SoftmaxMode::Hierarchical) {
        huffman_ = HuffmanCoding::build(output_vocab.counts());
        output_rows_ = output_vocab.size() - 1;
    } else {
        huffman_ = HuffmanCoding{};
        output_rows_ = output_vocab.size();
    }
    output_weights_.assign(static_cast<size_t>(output_rows_) * dim_, 0.0);
}

void EmbeddingSpace::init_weights(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5 / dim_, 0.5 / dim_);
    for (auto& w : input_weights_) w = dist(rng);
    std::fill(output_weights_.begin(), output_weights_.end(), 0.0);
}

std::span<double> EmbeddingSpace::input_vector(int32_t word) {
    return {input_weights_.data() + static_cast<size_t>(word) * dim_, static_cast<size_t>(dim_)};
}

std::span<const double> EmbeddingSpace::input_vector(int32_t word) const {
    return {input_weights_.data() + static_cast<size_t>(word) * dim_, static_cast<size_t>(dim_)};
}

std::span<double> EmbeddingSpace::output_vector(int32_t row) {
    return {output_weights_.data() + static_cast<size_t>(row) * dim_, static_cast<size_t>(dim_)};
}

std::span<const double> EmbeddingSpace::output_vector(int32_t row) const {
    return {output_weights_.data() + static_cast<size_t>(row) * dim_, static_cast<size_t>(dim_)};
}

std::span<const double> EmbeddingSpace::vector_for(const std::string& token) const {
    const auto idx = vocab_.index_of(token);
    if (!idx) return {};
    return input_vector(*idx);
}

bool EmbeddingSpace::operator==(const EmbeddingSpace& other) const {
    return kind_ == other.kind_ && dim_ == other.dim_ && mode_ == other.mode_ &&
           vocab_.size() == other.vocab_.size() && input_weights_ == other.input_weights_ &&
           output_weights_ == other.output_weights_ && output_rows_ == other.output_rows_ &&
           huffman_.codes == other.huffman_.codes && huffman_.points == other.huffman_.points;
}

std::vector<double> context_mean(const std::vector<std::span<const double>>& vectors) {
    if (vectors.empty()) throw std::invalid_argument("context_mean of empty context");
    std::vector<double> mean(vectors.front().size(), 0.0);
    for (const auto& v : vectors) {
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double target_loss(const EmbeddingSpace& space, std::span<const double> mean, int32_t target) {
    if (target < 0 || target >= space.output_vocab_size()) {
        throw std::out_of_range("target index out of range");
    }
    if (space.mode() == SoftmaxMode::Hierarchical) {
        const auto& code = space.huffman().codes[target];
        const auto& point = space.huffman().points[target];
        double loss = 0.0;
        for (size_t j = 0; j < code.size(); ++j) {
            const double x = dot(space.output_vector(point[j]), mean);
            loss -= log_sigmoid(code[j] == 0 ? x : -x);
        }
        return loss;
    }
    // exact softmax: logsumexp(z) - z_target
    const int32_t v = space.output_rows();
    double zmax = -1e300;
    std::vector<double> z(v);
    for (int32_t w = 0; w < v; ++w) {
        z[w] = dot(space.output_vector(w), mean);
        zmax = std::max(zmax, z[w]);
    }
    double sum = 0.0;
    for (int32_t w = 0; w < v; ++w) sum += std::exp(z[w] - zmax);
    return zmax + std::log(sum) - z[target];
}

double target_probability(const EmbeddingSpace& space, std::span<const double> mean,
                          int32_t target) {
    return std::exp(-target_loss(space, mean, target));
}

namespace {

// Shared forward/backward for one (context, target). Computes the loss with
// the current weights, then applies the SGD step when lr > 0. The gradient
// w.r.t. each context row is grad_h / context_count (h is the mean).
double train_step(EmbeddingSpace& space, const std::vector<int32_t>& context, int32_t target,
                  double lr, std::vector<double>& mean, std::vector<double>& grad_h,
                  std::vector<double>& z) {
    const int dim = space.dim();
    mean.assign(dim, 0.0);
    for (int32_t c : context) {
        const auto v = space.input_vector(c);
        for (int i = 0; i < dim; ++i) mean[i] += v[i];
    }
    const double inv_n = 1.0 / static_cast<double>(context.size());
    for (int i = 0; i < dim; ++i) mean[i] *= inv_n;

    grad_h.assign(dim, 0.0);
    double loss = 0.0;

    if (space.mode() == SoftmaxMode::Hierarchical) {
        const auto& code = space.huffman().codes[target];
        const auto& point = space.huffman().points[target];
        for (size_t j = 0; j < code.size(); ++j) {
            auto u = space.output_vector(point[j]);
            const double x = dot(u, mean);
            loss -= log_sigmoid(code[j] == 0 ? x : -x);
            const double g = sigmoid(x) - (code[j] == 0 ? 1.0 : 0.0);  // dE/dx
            for (int i = 0; i < dim; ++i) grad_h[i] += g * u[i];
            if (lr > 0) {
                for (int i = 0; i < dim; ++i) u[i] -= lr * g * mean[i];
            }
        }
    } else {
        const int32_t v = space.output_rows();
        z.resize(v);
        double zmax = -1e300;
        for (int32_t w = 0; w < v; ++w) {
            z[w] = dot(space.output_vector(w), mean);
            zmax = std::max(zmax, z[w]);
        }
        double sum = 0.0;
        for (int32_t w = 0; w < v; ++w) {
            z[w] = std::exp(z[w] - zmax);
            sum += z[w];
        }
        loss = -std::log(z[target] / sum);
        for (int32_t w = 0; w < v; ++w) {
            const double g = z[w] / sum - (w == target ? 1.0 : 0.0);  // dE/dz_w
            auto o = space.output_vector(w);
            for (int i = 0; i < dim; ++i) grad_h[i] += g * o[i];
            if (lr > 0) {
                for (int i = 0; i < dim; ++i) o[i] -= lr * g * mean[i];
            }
        }
    }

    if (lr > 0) {
        const double scale = lr * inv_n;
        for (int32_t c : context) {
            auto v = space.input_vector(c);
            for (int i = 0; i < dim; ++i) v[i] -= scale * grad_h[i];
        }
    }
    return loss;
}

void gather_context(const std::vector<int32_t>& seq, size_t pos, int k1, int k2,
                    std::vector<int32_t>& out) {
    out.clear();
    const size_t lo = pos >= static_cast<size_t>(k1) ? pos - k1 : 0;
    const size_t hi = std::min(seq.size() - 1, pos + static_cast<size_t>(k2));
    for (size_t p = lo; p <= hi; ++p) {
        if (p != pos) out.push_back(seq[p]);
    }
}

}  // namespace

void train_in_place(EmbeddingSpace& space, const std::vector<std::vector<int32_t>>& input_seqs,
                    const std::vector<std::vector<int32_t>>& output_seqs,
                    const TrainConfig& config, TrainStats* stats) {
    int64_t total_positions = 0;
    for (const auto& s : input_seqs) total_positions += static_cast<int64_t>(s.size());
    const int64_t schedule_total = std::max<int64_t>(1, total_positions * config.epochs);
    std::atomic<int64_t> processed{0};
    std::atomic<size_t> skipped{0};

    const auto t0 = std::chrono::steady_clock::now();
    TrainStats local;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<double> worker_loss(config.workers, 0.0);
        std::vector<int64_t> worker_targets(config.workers, 0);
        auto worker_fn = [&](int w) {
            std::vector<int32_t> context;
            std::vector<double> mean, grad_h, z;
            double loss_sum = 0.0;
            int64_t targets = 0;
            for (size_t s = w; s < input_seqs.size(); s += config.workers) {
                const auto& in_seq = input_seqs[s];
                const auto& out_seq = output_seqs[s];
                for (size_t pos = 0; pos < in_seq.size(); ++pos) {
                    const int64_t done = processed.fetch_add(1, std::memory_order_relaxed);
                    gather_context(in_seq, pos, config.window_before, config.window_after,
                                   context);
                    if (context.empty() || pos >= out_seq.size()) {
                        skipped.fetch_add(1, std::memory_order_relaxed);
                        continue;
                    }
                    const double progress =
                        static_cast<double>(done) / static_cast<double>(schedule_total);
                    const double lr =
                        std::max(config.learning_rate * (1.0 - progress),
                                 config.learning_rate * 1e-4);
                    loss_sum += train_step(space, context, out_seq[pos], lr, mean, grad_h, z);
                    ++targets;
                }
            }
            worker_loss[w] = loss_sum;
            worker_targets[w] = targets;
        };
        if (config.workers == 1) {
            worker_fn(0);
        } else {
            std::vector<std::thread> threads;
            threads.reserve(config.workers);
            for (int w = 0; w < config.workers; ++w) threads.emplace_back(worker_fn, w);
            for (auto& t : threads) t.join();
        }
        double loss_sum = 0.0;
        int64_t targets = 0;
        for (int w = 0; w < config.workers; ++w) {
            loss_sum += worker_loss[w];
            targets += worker_targets[w];
        }
        local.epoch_mean_loss.push_back(targets > 0 ? loss_sum / targets : 0.0);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    local.skipped_targets = skipped.load();
    local.tokens_per_sec = secs > 0 ? static_cast<double>(processed.load()) / secs : 0.0;
    if (stats) *stats = local;
}

EmbeddingSpace train(const std::vector<TokenSequence>& sequences, WordKind kind,
                     const TrainConfig& config, TrainStats* stats) {
    config.validate();
    Vocabulary vocab = build_vocabulary(sequences, kind);
    if (vocab.size() < 2) {
        throw std::runtime_error("training requires a vocabulary of at least 2 words");
    }
    const auto input_seqs = index_sequences(sequences, vocab, kind);

    EmbeddingSpace space(kind, std::move(vocab), config.dim, config.softmax);
    space.init_weights(config.seed);

    const bool cross_now = config.output_kind == OutputKind::CrossLocation && !config.two_round &&
                           kind != WordKind::Location;
    if (cross_now) {
        Vocabulary loc_vocab = build_vocabulary(sequences, WordKind::Location);
        if (loc_vocab.size() < 2) {
            throw std::runtime_error("cross-kind output requires >= 2 location words");
        }
        const auto output_seqs = index_sequences(sequences, loc_vocab, WordKind::Location);
        space.attach_output(config.softmax, loc_vocab, true);
        train_in_place(space, input_seqs, output_seqs, config, stats);
        return space;
    }

    train_in_place(space, input_seqs, input_seqs, config, stats);

    if (config.two_round && kind != WordKind::Location) {
        Vocabulary loc_vocab = build_vocabulary(sequences, WordKind::Location);
        if (loc_vocab.size() < 2) {
            throw std::runtime_error("two-round training requires >= 2 location words");
        }
        const auto output_seqs = index_sequences(sequences, loc_vocab, WordKind::Location);
        space.attach_output(config.softmax, loc_vocab, true);
        TrainStats round2;
        train_in_place(space, input_seqs, output_seqs, config, &round2);
        if (stats) {
            stats->epoch_mean_loss.insert(stats->epoch_mean_loss.end(),
                                          round2.epoch_mean_loss.begin(),
                                          round2.epoch_mean_loss.end());
            stats->skipped_targets += round2.skipped_targets;
        }
    }
    return space;
}

double gradient_check(const EmbeddingSpace& space, const std::vector<int32_t>& context,
                      int32_t target, double step) {
    if (context.empty()) throw std::invalid_argument("gradient check needs a non-empty context");
    EmbeddingSpace work = space;

    // Analytic gradients via the lr<0 sentinel path of train_step (no update).
    const int dim = work.dim();
    std::vector<double> mean, grad_h, z;
    train_step(work, context, target, 0.0, mean, grad_h, z);

    std::vector<double> grad_input(work.input_weights().size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(context.size());
    for (int32_t c : context) {
        for (int i = 0; i < dim; ++i) {
            grad_input[static_cast<size_t>(c) * dim + i] += grad_h[i] * inv_n;
        }
    }
    std::vector<double> grad_output(work.output_weights().size(), 0.0);
    if (work.mode() == SoftmaxMode::Hierarchical) {
        const auto& code = work.huffman().codes[target];
        const auto& point = work.huffman().points[target];
        for (size_t j = 0; j < code.size(); ++j) {
            const double x = dot(work.output_vector(point[j]), mean);
            const double g = sigmoid(x) - (code[j] == 0 ? 1.0 : 0.0);
            for (int i = 0; i < dim; ++i) {
                grad_output[static_cast<size_t>(point[j]) * dim + i] += g * mean[i];
            }
        }
    } else {
        const int32_t v = work.output_rows();
        std::vector<double> zz(v);
        double zmax = -1e300;
        for (int32_t w = 0; w < v; ++w) {
            zz[w] = dot(work.output_vector(w), mean);
            zmax = std::max(zmax, zz[w]);
        }
        double sum = 0.0;
        for (int32_t w = 0; w < v; ++w) {
            zz[w] = std::exp(zz[w] - zmax);
            sum += zz[w];
        }
        for (int32_t w = 0; w < v; ++w) {
            const double g = zz[w] / sum - (w == target ? 1.0 : 0.0);
            for (int i = 0; i < dim; ++i) {
                grad_output[static_cast<size_t>(w) * dim + i] += g * mean[i];
            }
        }
    }

    auto loss_at = [&]() {
        std::vector<std::span<const double>> ctx_vecs;
        ctx_vecs.reserve(context.size());
        for (int32_t c : context) ctx_vecs.push_back(work.input_vector(c));
        const auto m = context_mean(ctx_vecs);
        return target_loss(work, m, target);
    };

    double max_rel = 0.0;
    auto check_matrix = [&](std::vector<double>& weights, const std::vector<double>& analytic) {
        for (size_t i = 0; i < weights.size(); ++i) {
            const double orig = weights[i];
            weights[i] = orig + step;
            const double plus = loss_at();
            weights[i] = orig - step;
            const double minus = loss_at();
            weights[i] = orig;
            const double numeric = (plus - minus) / (2 * step);
            const double denom = std::max({1e-8, std::abs(numeric), std::abs(analytic[i])});
            max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) / denom);
        }
    };
    check_matrix(work.input_weights(), grad_input);
    check_matrix(work.output_weights(), grad_output);
    return max_rel;
}

// --- persistence ---

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    uint32_t len = 0;
    read_raw(in, len);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

constexpr char kAuxMagic[8] = {'S', 'T', 'E', 'S', 'E', 'M', 'B', '1'};

}  // namespace

void ModelIO::save(const EmbeddingSpace& space, const std::string& path) {
    std::ostringstream text;
    text << space.vocab_size() << ' ' << space.dim() << ' ' << to_string(space.kind()) << '\n';
    char buf[32];
    for (int32_t w = 0; w < space.vocab_size(); ++w) {
        text << space.vocab().token(w);
        const auto vec = space.input_vector(w);
        for (double x : vec) {
            std::snprintf(buf, sizeof(buf), " %.17g", x);
            text << buf;
        }
        text << '\n';
    }
    write_text_file_atomic(path, text.str());

    std::ostringstream aux(std::ios::binary);
    aux.write(kAuxMagic, sizeof(kAuxMagic));
    write_raw(aux, uint32_t{1});
    write_raw(aux, static_cast<uint8_t>(space.kind()));
    write_raw(aux, static_cast<uint8_t>(space.mode()));
    write_raw(aux, static_cast<uint8_t>(space.cross_output() ? 1 : 0));
    write_raw(aux, uint8_t{0});
    write_raw(aux, space.vocab_size());
    write_raw(aux, static_cast<int32_t>(space.dim()));
    write_raw(aux, space.output_rows());
    write_raw(aux, space.output_vocab_size());
    for (int32_t w = 0; w < space.vocab_size(); ++w) write_raw(aux, space.vocab().count(w));
    if (space.cross_output()) {
        const auto& ov = space.output_vocab();
        for (int32_t w = 0; w < ov.size(); ++w) {
            write_string(aux, ov.token(w));
            write_raw(aux, ov.count(w));
        }
    }
    if (space.mode() == SoftmaxMode::Hierarchical) {
        const auto& hc = space.huffman();
        for (int32_t w = 0; w < space.output_vocab_size(); ++w) {
            write_raw(aux, static_cast<uint32_t>(hc.codes[w].size()));
            aux.write(reinterpret_cast<const char*>(hc.codes[w].data()),
                      static_cast<std::streamsize>(hc.codes[w].size()));
            aux.write(reinterpret_cast<const char*>(hc.points[w].data()),
                      static_cast<std::streamsize>(hc.points[w].size() * sizeof(int32_t)));
        }
    }
    aux.write(reinterpret_cast<const char*>(space.output_weights().data()),
              static_cast<std::streamsize>(space.output_weights().size() * sizeof(double)));
    write_text_file_atomic(path + ".aux", aux.str());
}

EmbeddingSpace ModelIO::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    int32_t v = 0;
    int dim = 0;
    std::string kind_str;
    {
        std::string header;
        if (!std::getline(in, header)) throw std::runtime_error("empty model file: " + path);
        std::istringstream hs(header);
        if (!(hs >> v >> dim >> kind_str)) {
            throw std::runtime_error("malformed model header: " + header);
        }
    }
    const auto kind = word_kind_from_string(kind_str);
    if (!kind) throw std::runtime_error("unknown word kind in model header: " + kind_str);
    if (v < 1 || dim < 1) throw std::runtime_error("invalid model dimensions");

    std::vector<std::string> tokens;
    tokens.reserve(v);
    std::vector<double> weights;
    weights.reserve(static_cast<size_t>(v) * dim);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        tokens.push_back(token);
        double x;
        int got = 0;
        while (ls >> x) {
            weights.push_back(x);
            ++got;
        }
        if (got != dim) throw std::runtime_error("model row has wrong dimension: " + token);
    }
    if (static_cast<int32_t>(tokens.size()) != v) {
        throw std::runtime_error("model row count does not match header");
    }

    EmbeddingSpace space;
    space.kind_ = *kind;
    space.dim_ = dim;
    space.input_weights_ = std::move(weights);

    std::ifstream aux(path + ".aux", std::ios::binary);
    if (!aux) {
        // Inference-only load: tokens with unit counts, no output layer.
        for (const auto& t : tokens) space.vocab_.add(t, 1);
        space.output_rows_ = 0;
        space.output_vocab_size_ = space.vocab_.size();
        return space;
    }
    char magic[8];
    aux.read(magic, sizeof(magic));
    if (std::memcmp(magic, kAuxMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("bad sidecar magic: " + path + ".aux");
    }
    uint32_t version = 0;
    read_raw(aux, version);
    if (version != 1) throw std::runtime_error("unsupported sidecar version");
    uint8_t kind_b, mode_b, cross_b, pad;
    read_raw(aux, kind_b);
    read_raw(aux, mode_b);
    read_raw(aux, cross_b);
    read_raw(aux, pad);
    int32_t v_aux, dim_aux, output_rows, output_vocab_size;
    read_raw(aux, v_aux);
    read_raw(aux, dim_aux);
    read_raw(aux, output_rows);
    read_raw(aux, output_vocab_size);
    if (v_aux != v || dim_aux != dim) {
        throw std::runtime_error("sidecar does not match model file dimensions");
    }
    space.mode_ = static_cast<SoftmaxMode>(mode_b);
    space.cross_output_ = cross_b != 0;
    space.output_rows_ = output_rows;
    space.output_vocab_size_ = output_vocab_size;
    for (int32_t w = 0; w < v; ++w) {
        int64_t count = 0;
        read_raw(aux, count);
        space.vocab_.add(tokens[w], count);
    }
    if (space.cross_output_) {
        for (int32_t w = 0; w < output_vocab_size; ++w) {
            std::string token = read_string(aux);
            int64_t count = 0;
            read_raw(aux, count);
            space.output_vocab_.add(token, count);
        }
    }
    if (space.mode_ == SoftmaxMode::Hierarchical) {
        space.huffman_.codes.resize(output_vocab_size);
        space.huffman_.points.resize(output_vocab_size);
        for (int32_t w = 0; w < output_vocab_size; ++w) {
            uint32_t len = 0;
            read_raw(aux, len);
            space.huffman_.codes[w].resize(len);
            aux.read(reinterpret_cast<char*>(space.huffman_.codes[w].data()), len);
            space.huffman_.points[w].resize(len);
            aux.read(reinterpret_cast<char*>(space.huffman_.points[w].data()),
                     static_cast<std::streamsize>(len * sizeof(int32_t)));
        }
    }
    space.output_weights_.resize(static_cast<size_t>(output_rows) * dim);
    aux.read(reinterpret_cast<char*>(space.output_weights_.data()),
             static_cast<std::streamsize>(space.output_weights_.size() * sizeof(double)));
    if (!aux) throw std::runtime_error("truncated sidecar: " + path + ".aux");
    return space;
}

}  // namespace stes
