#pragma once

#include "esgvine/panel.hpp"

#include <array>
#include <string>
#include <vector>

namespace esgvine {

/// Node ids of the index variables, in this order at the front of every
/// structure: market, then the four class indices.
inline constexpr std::array<const char*, 5> kIndexNodeIds{"I_M", "I_A", "I_B", "I_C", "I_D"};
inline constexpr std::size_t kMarketNode = 0;
inline std::size_t class_index_node(EsgClass k) { return 1 + class_slot(k); }
inline constexpr std::size_t kTemplateTrees = 5;

/// Pair-copula edge: conditioned pair (first, second) given `conditioning`,
/// all as node positions.
struct Edge {
    std::size_t first = 0;
    std::size_t second = 0;
    std::vector<std::size_t> conditioning;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct VineStructure {
    std::vector<std::string> nodes;    // kIndexNodeIds, then asset ids
    std::vector<EsgClass> asset_classes;  // aligned with nodes[5..]
    std::vector<std::vector<Edge>> trees;

    std::size_t n_nodes() const { return nodes.size(); }
    std::size_t truncation_level() const { return trees.size(); }
    std::size_t edge_count() const;
    std::size_t node_index(const std::string& id) const;  // throws DataError
};

/// Instantiates the five-tree template for the given assets. Throws
/// DataError when a class is empty, ids repeat, or an id is reserved.
VineStructure build_structure(const std::vector<std::string>& asset_ids, const std::vector<EsgClass>& classes);

/// Throws DataError unless every tree is a spanning tree on the previous
/// tree's edges and every edge satisfies the proximity condition.
void validate_structure(const VineStructure& s);

/// Human-readable edge label, e.g. "a1,I_B|I_A,I_M".
std::string edge_label(const VineStructure& s, const Edge& e);

/// For edge e in tree m > 0: the tree m-1 edge that supplies the
/// pseudo-observation of `first` (side 0) and of `second` (side 1), and
/// whether that variable sits in the first position of the parent edge.
struct EdgeInput {
    std::size_t parent = 0;
    bool is_first_of_parent = false;
};
struct EdgeInputs {
    std::array<EdgeInput, 2> side;
};
/// inputs[m][e]; empty for tree 0. Throws DataError if a parent is missing.
std::vector<std::vector<EdgeInputs>> resolve_inputs(const VineStructure& s);

}  // namespace esgvine
