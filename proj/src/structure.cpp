#include "esgvine/structure.hpp"

#include "esgvine/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace esgvine {

namespace {

using Key = std::vector<std::size_t>;

Key complete_set(const Edge& e) {
    Key k = e.conditioning;
    k.push_back(e.first);
    k.push_back(e.second);
    std::sort(k.begin(), k.end());
    return k;
}

Key without(Key k, std::size_t v) {
    k.erase(std::find(k.begin(), k.end(), v));
    return k;
}

// Per class, the other class indices an asset is paired with in trees 3-5.
std::array<EsgClass, 3> later_partners(EsgClass k) {
    switch (k) {
        case EsgClass::A: return {EsgClass::B, EsgClass::C, EsgClass::D};
        case EsgClass::B: return {EsgClass::C, EsgClass::A, EsgClass::D};
        case EsgClass::C: return {EsgClass::B, EsgClass::D, EsgClass::A};
        case EsgClass::D: return {EsgClass::C, EsgClass::B, EsgClass::A};
    }
    return {};
}

std::size_t idx(EsgClass k) { return class_index_node(k); }

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

std::size_t VineStructure::edge_count() const {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.size();
    return n;
}

std::size_t VineStructure::node_index(const std::string& id) const {
    const auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw DataError("node '" + id + "' is not part of the vine");
    return static_cast<std::size_t>(it - nodes.begin());
}

VineStructure build_structure(const std::vector<std::string>& asset_ids, const std::vector<EsgClass>& classes) {
    if (asset_ids.size() != classes.size()) throw DataError("build_structure: ids and classes differ in length");
    std::array<std::size_t, 4> counts{};
    std::set<std::string> seen;
    for (std::size_t j = 0; j < asset_ids.size(); ++j) {
        for (const char* reserved : kIndexNodeIds) {
            if (asset_ids[j] == reserved) throw DataError("asset id '" + asset_ids[j] + "' is reserved");
        }
        if (!seen.insert(asset_ids[j]).second) throw DataError("duplicate asset id '" + asset_ids[j] + "'");
        ++counts[class_slot(classes[j])];
    }
    for (EsgClass k : kEsgClasses) {
        if (counts[class_slot(k)] == 0) {
            throw DataError(std::string("empty class ") + class_letter(k) + ": the vine template needs every class");
        }
    }

    VineStructure s;
    s.nodes.assign(kIndexNodeIds.begin(), kIndexNodeIds.end());
    s.nodes.insert(s.nodes.end(), asset_ids.begin(), asset_ids.end());
    s.asset_classes = classes;
    s.trees.assign(kTemplateTrees, {});

    const std::size_t M = kMarketNode;
    const std::size_t A = idx(EsgClass::A), B = idx(EsgClass::B), C = idx(EsgClass::C), D = idx(EsgClass::D);

    for (std::size_t j = 0; j < asset_ids.size(); ++j) {
        const std::size_t a = kIndexNodeIds.size() + j;
        const EsgClass k = classes[j];
        const std::size_t own = idx(k);
        const auto later = later_partners(k);
        s.trees[0].push_back({a, own, {}});
        s.trees[1].push_back({a, M, {own}});
        std::vector<std::size_t> cond{own, M};
        for (std::size_t m = 0; m < 3; ++m) {
            s.trees[2 + m].push_back({a, idx(later[m]), cond});
            cond.push_back(idx(later[m]));
        }
    }
    s.trees[0].insert(s.trees[0].end(), {{A, M, {}}, {B, M, {}}, {C, M, {}}, {D, M, {}}});
    s.trees[1].insert(s.trees[1].end(), {{A, B, {M}}, {B, C, {M}}, {C, D, {M}}});
    s.trees[2].insert(s.trees[2].end(), {{A, C, {M, B}}, {B, D, {M, C}}});
    s.trees[3].push_back({A, D, {M, B, C}});

    validate_structure(s);
    return s;
}

void validate_structure(const VineStructure& s) {
    const std::size_t n = s.n_nodes();
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        const auto& tree = s.trees[m];
        const std::size_t tree_nodes = m == 0 ? n : s.trees[m - 1].size();
        if (tree.size() + 1 != tree_nodes) {
            throw DataError("tree " + std::to_string(m + 1) + " has " + std::to_string(tree.size()) +
                            " edges for " + std::to_string(tree_nodes) + " nodes");
        }
        std::map<Key, std::size_t> previous;
        if (m > 0) {
            for (std::size_t e = 0; e < s.trees[m - 1].size(); ++e) previous[complete_set(s.trees[m - 1][e])] = e;
        }
        UnionFind uf(tree_nodes);
        for (const auto& edge : tree) {
            if (edge.conditioning.size() != m || edge.first == edge.second || edge.first >= n || edge.second >= n) {
                throw DataError("malformed edge in tree " + std::to_string(m + 1) + ": " + edge_label(s, edge));
            }
            std::size_t u = edge.first, v = edge.second;
            if (m > 0) {
                const Key full = complete_set(edge);
                const auto pu = previous.find(without(full, edge.second));
                const auto pv = previous.find(without(full, edge.first));
                if (pu == previous.end() || pv == previous.end()) {
                    throw DataError("proximity condition fails for " + edge_label(s, edge));
                }
                u = pu->second;
                v = pv->second;
            }
            if (!uf.unite(u, v)) throw DataError("tree " + std::to_string(m + 1) + " contains a cycle at " + edge_label(s, edge));
        }
    }
}

std::string edge_label(const VineStructure& s, const Edge& e) {
    auto name = [&](std::size_t i) { return i < s.nodes.size() ? s.nodes[i] : "#" + std::to_string(i); };
    std::string out = name(e.first) + "," + name(e.second);
    if (!e.conditioning.empty()) {
        out += "|";
        for (std::size_t i = 0; i < e.conditioning.size(); ++i) {
            if (i) out += ",";
            out += name(e.conditioning[i]);
        }
    }
    return out;
}

std::vector<std::vector<EdgeInputs>> resolve_inputs(const VineStructure& s) {
    std::vector<std::vector<EdgeInputs>> out(s.trees.size());
    for (std::size_t m = 1; m < s.trees.size(); ++m) {
        std::map<Key, std::size_t> previous;
        for (std::size_t e = 0; e < s.trees[m - 1].size(); ++e) previous[complete_set(s.trees[m - 1][e])] = e;
        for (const auto& edge : s.trees[m]) {
            EdgeInputs in;
            const Key full = complete_set(edge);
            const std::array<std::size_t, 2> vars{edge.first, edge.second};
            for (std::size_t side = 0; side < 2; ++side) {
                const auto it = previous.find(without(full, vars[1 - side]));
                if (it == previous.end()) throw DataError("no parent edge for " + edge_label(s, edge));
                const Edge& parent = s.trees[m - 1][it->second];
                in.side[side] = {it->second, parent.first == vars[side]};
            }
            out[m].push_back(in);
        }
    }
    return out;
}

}  // namespace esgvine
