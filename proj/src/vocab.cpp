#include "stes/vocab.hpp"

#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace stes {

std::string_view to_string(WordKind kind) {
    return kind == WordKind::Feature ? "feature" : "location";
}

std::optional<WordKind> word_kind_from_string(std::string_view name) {
    if (name == "feature") return WordKind::Feature;
    if (name == "location") return WordKind::Location;
    return std::nullopt;
}

int32_t Vocabulary::add(const std::string& token) {
    if (token.empty()) throw std::invalid_argument("empty token");
    auto [it, inserted] = index_.try_emplace(token, size());
    if (inserted) {
        tokens_.push_back(token);
        counts_.push_back(1);
    } else {
        ++counts_[it->second];
    }
    return it->second;
}

void Vocabulary::add(const std::string& token, int64_t count) {
    if (token.empty()) throw std::invalid_argument("empty token");
    if (count < 1) throw std::invalid_argument("token count must be >= 1");
    auto [it, inserted] = index_.try_emplace(token, size());
    if (inserted) {
        tokens_.push_back(token);
        counts_.push_back(count);
    } else {
        counts_[it->second] += count;
    }
}

std::optional<int32_t> Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int64_t Vocabulary::total_count() const {
    return std::accumulate(counts_.begin(), counts_.end(), int64_t{0});
}

std::string Vocabulary::to_text() const {
    std::ostringstream out;
    for (int32_t i = 0; i < size(); ++i) {
        out << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\n';
    }
    return out.str();
}

Vocabulary Vocabulary::from_text(const std::string& text) {
    Vocabulary vocab;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t t1 = line.find('\t');
        const size_t t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            throw std::runtime_error("malformed vocabulary line: " + line);
        }
        const std::string token = line.substr(0, t1);
        int32_t index = 0;
        int64_t count = 0;
        std::from_chars(line.data() + t1 + 1, line.data() + t2, index);
        std::from_chars(line.data() + t2 + 1, line.data() + line.size(), count);
        if (index != vocab.size()) {
            throw std::runtime_error("vocabulary indices must be dense and ordered");
        }
        vocab.add(token, count);
    }
    return vocab;
}

Vocabulary build_vocabulary(const std::vector<TokenSequence>& sequences, WordKind kind) {
    Vocabulary vocab;
    for (const auto& seq : sequences) {
        const auto& words = kind == WordKind::Feature ? seq.feature_words : seq.location_words;
        for (const auto& w : words) vocab.add(w);
    }
    return vocab;
}

std::vector<std::vector<int32_t>> index_sequences(const std::vector<TokenSequence>& sequences,
                                                  const Vocabulary& vocab, WordKind kind) {
    std::vector<std::vector<int32_t>> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) {
        const auto& words = kind == WordKind::Feature ? seq.feature_words : seq.location_words;
        std::vector<int32_t> ids;
        ids.reserve(words.size());
        for (const auto& w : words) {
            if (auto idx = vocab.index_of(w)) ids.push_back(*idx);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

}  // namespace stes
