#include "stes/huffman.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace stes {

HuffmanCoding HuffmanCoding::build(const std::vector<int64_t>& counts) {
    const int32_t v = static_cast<int32_t>(counts.size());
    if (v < 2) throw std::invalid_argument("Huffman coding needs at least 2 words");

    // Two-queue construction over count-ascending leaves. Merged weights are
    // non-decreasing, so the next minimum is always at one of two fronts;
    // ties prefer the leaf queue, which fixes the tree deterministically.
    std::vector<int32_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int32_t a, int32_t b) { return counts[a] < counts[b]; });

    const int32_t total_nodes = 2 * v - 1;
    std::vector<int64_t> weight(total_nodes, 0);
    std::vector<int32_t> parent(total_nodes, -1);
    std::vector<uint8_t> bit(total_nodes, 0);
    for (int32_t i = 0; i < v; ++i) weight[i] = counts[order[i]];

    int32_t leaf_pos = 0;
    int32_t merged_pos = v;
    auto take_min = [&](int32_t next_merged) -> int32_t {
        if (leaf_pos < v && (next_merged >= merged_pos || weight[leaf_pos] <= weight[next_merged])) {
            return leaf_pos++;
        }
        return next_merged;
    };
    int32_t merged_front = v;
    for (int32_t node = v; node < total_nodes; ++node) {
        const int32_t a = take_min(merged_front);
        if (a == merged_front) ++merged_front;
        const int32_t b = take_min(merged_front);
        if (b == merged_front) ++merged_front;
        weight[node] = weight[a] + weight[b];
        parent[a] = node;
        parent[b] = node;
        bit[a] = 0;
        bit[b] = 1;
        merged_pos = node + 1;
    }

    HuffmanCoding hc;
    hc.codes.resize(v);
    hc.points.resize(v);
    const int32_t root = total_nodes - 1;
    for (int32_t i = 0; i < v; ++i) {
        std::vector<uint8_t> code;
        std::vector<int32_t> point;
        for (int32_t node = i; node != root; node = parent[node]) {
            code.push_back(bit[node]);
            point.push_back(parent[node] - v);  // inner nodes indexed from 0
        }
        std::reverse(code.begin(), code.end());
        std::reverse(point.begin(), point.end());
        hc.codes[order[i]] = std::move(code);
        hc.points[order[i]] = std::move(point);
    }
    return hc;
}

int32_t HuffmanCoding::inner_node_count() const {
    int32_t max_node = -1;
    for (const auto& path : points) {
        for (int32_t node : path) max_node = std::max(max_node, node);
    }
    return max_node + 1;
}

double HuffmanCoding::expected_code_length(const std::vector<int64_t>& counts) const {
    if (counts.size() != codes.size()) {
        throw std::invalid_argument("counts size does not match coding");
    }
    double weighted = 0.0;
    double total = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        weighted += static_cast<double>(counts[i]) * static_cast<double>(codes[i].size());
        total += static_cast<double>(counts[i]);
    }
    return total > 0 ? weighted / total : 0.0;
}

}  // namespace stes
