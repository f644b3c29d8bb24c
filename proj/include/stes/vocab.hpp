#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stes/sequences.hpp"

namespace stes {

enum class WordKind { Feature, Location };

std::string_view to_string(WordKind kind);
std::optional<WordKind> word_kind_from_string(std::string_view name);

// Dense token -> index mapping with corpus frequencies. Indices are assigned
// in first-occurrence order over the corpus, which keeps vocabulary
// construction deterministic for a given sequence order.
class Vocabulary {
public:
    int32_t add(const std::string& token);  // inserts or bumps the count
    void add(const std::string& token, int64_t count);

    std::optional<int32_t> index_of(const std::string& token) const;
    const std::string& token(int32_t index) const { return tokens_[index]; }
    int64_t count(int32_t index) const { return counts_[index]; }
    const std::vector<int64_t>& counts() const { return counts_; }
    int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
    int64_t total_count() const;

    // Text export: token <TAB> index <TAB> count
    std::string to_text() const;
    static Vocabulary from_text(const std::string& text);

private:
    std::unordered_map<std::string, int32_t> index_;
    std::vector<std::string> tokens_;
    std::vector<int64_t> counts_;
};

Vocabulary build_vocabulary(const std::vector<TokenSequence>& sequences, WordKind kind);

// Sequences re-expressed as vocabulary indices, the trainer's input unit.
std::vector<std::vector<int32_t>> index_sequences(const std::vector<TokenSequence>& sequences,
                                                  const Vocabulary& vocab, WordKind kind);

}  // namespace stes
