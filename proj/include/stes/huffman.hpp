#pragma once

#include <cstdint>
#include <vector>

namespace stes {

// Huffman coding over vocabulary frequencies. Leaves are the V words; the
// V-1 inner nodes carry the hierarchical-softmax decision vectors. Codes are
// bit sequences root-to-leaf (0 = "left"), points are the inner-node indices
// visited, root first. code length == path length for every word.
struct HuffmanCoding {
    std::vector<std::vector<uint8_t>> codes;
    std::vector<std::vector<int32_t>> points;

    static HuffmanCoding build(const std::vector<int64_t>& counts);

    int32_t word_count() const { return static_cast<int32_t>(codes.size()); }
    int32_t inner_node_count() const;
    bool empty() const { return codes.empty(); }

    // Sum(count_i * len_i) / Sum(count_i)
    double expected_code_length(const std::vector<int64_t>& counts) const;
};

}  // namespace stes
