#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stes/huffman.hpp"
#include "stes/sequences.hpp"
#include "stes/vocab.hpp"

namespace stes {

enum class SoftmaxMode : uint8_t { Hierarchical = 0, Exact = 1 };

// Output layer selection: Same trains kind->kind (the default), CrossLocation
// keeps the input kind but predicts the aligned location word instead.
enum class OutputKind : uint8_t { Same = 0, CrossLocation = 1 };

struct TrainConfig {
    int dim = 200;
    int window_before = 5;  // k1
    int window_after = 5;   // k2
    int epochs = 5;
    double learning_rate = 0.025;
    uint64_t seed = 42;
    int workers = 1;
    SoftmaxMode softmax = SoftmaxMode::Hierarchical;
    OutputKind output_kind = OutputKind::Same;
    bool two_round = false;

    void validate() const;
};

struct TrainStats {
    std::vector<double> epoch_mean_loss;
    size_t skipped_targets = 0;  // empty contexts
    double tokens_per_sec = 0.0;
};

// One trained word space: input vectors are the V x dim matrix whose rows are
// the word embeddings; the output side is either V-1 hierarchical-softmax
// inner nodes or a full V x dim softmax layer, possibly over a different
// (cross-kind) output vocabulary.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;
    EmbeddingSpace(WordKind kind, Vocabulary vocab, int dim, SoftmaxMode mode);

    WordKind kind() const { return kind_; }
    const Vocabulary& vocab() const { return vocab_; }
    int dim() const { return dim_; }
    SoftmaxMode mode() const { return mode_; }
    int32_t vocab_size() const { return vocab_.size(); }

    std::span<double> input_vector(int32_t word);
    std::span<const double> input_vector(int32_t word) const;
    std::span<double> output_vector(int32_t row);
    std::span<const double> output_vector(int32_t row) const;

    std::vector<double>& input_weights() { return input_weights_; }
    const std::vector<double>& input_weights() const { return input_weights_; }
    std::vector<double>& output_weights() { return output_weights_; }
    const std::vector<double>& output_weights() const { return output_weights_; }
    int32_t output_rows() const { return output_rows_; }

    const HuffmanCoding& huffman() const { return huffman_; }
    int32_t output_vocab_size() const { return output_vocab_size_; }
    bool cross_output() const { return cross_output_; }
    const Vocabulary& output_vocab() const { return cross_output_ ? output_vocab_ : vocab_; }

    // Allocates the output layer for the given output vocabulary. Input
    // weights are seeded uniform in [-0.5/dim, 0.5/dim], output weights zero.
    void init_weights(uint64_t seed);
    void attach_output(SoftmaxMode mode, const Vocabulary& output_vocab, bool cross);

    // Vector for a token, or empty span when the token is unknown.
    std::span<const double> vector_for(const std::string& token) const;

    bool operator==(const EmbeddingSpace& other) const;

private:
    WordKind kind_ = WordKind::Feature;
    Vocabulary vocab_;
    int dim_ = 0;
    SoftmaxMode mode_ = SoftmaxMode::Hierarchical;
    std::vector<double> input_weights_;
    std::vector<double> output_weights_;
    int32_t output_rows_ = 0;
    int32_t output_vocab_size_ = 0;
    bool cross_output_ = false;
    Vocabulary output_vocab_;  // only when cross_output_
    HuffmanCoding huffman_;    // only in hierarchical mode

    friend class ModelIO;
};

// Element-wise mean of the context vectors; truncated windows divide by the
// actual count.
std::vector<double> context_mean(const std::vector<std::span<const double>>& vectors);

// p(target | context) in (0, 1). Exact mode evaluates the full softmax,
// hierarchical mode the product of sigmoid decisions along the Huffman path.
double target_probability(const EmbeddingSpace& space, std::span<const double> mean,
                          int32_t target);

// -log p(target | context)
double target_loss(const EmbeddingSpace& space, std::span<const double> mean, int32_t target);

EmbeddingSpace train(const std::vector<TokenSequence>& sequences, WordKind kind,
                     const TrainConfig& config, TrainStats* stats = nullptr);

// Continues SGD over an existing space (used by the two-round ablation).
void train_in_place(EmbeddingSpace& space, const std::vector<std::vector<int32_t>>& input_seqs,
                    const std::vector<std::vector<int32_t>>& output_seqs,
                    const TrainConfig& config, TrainStats* stats);

// Max relative error between analytic gradients of the per-target loss and
// central finite differences (step 1e-4), over every entry of both weight
// matrices.
double gradient_check(const EmbeddingSpace& space, const std::vector<int32_t>& context,
                      int32_t target, double step = 1e-4);

// Model persistence. The main file is text: header "V dim kind", then one
// line per token with its input vector. The binary sidecar ("<path>.aux")
// carries counts, Huffman codes, and output weights for exact round-trips.
class ModelIO {
public:
    static void save(const EmbeddingSpace& space, const std::string& path);
    static EmbeddingSpace load(const std::string& path);
};

double sigmoid(double x);
double log_sigmoid(double x);

}  // namespace stes
