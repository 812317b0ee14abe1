#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlcent/tensor.hpp"

namespace mlcent {

/// Edge-list format
///
///     # comment
///     mlnet <N> <L> <directed|undirected> <weighted|unweighted>
///     <node_i> <layer_i> <node_j> <layer_j> [<weight>]
///     couple <weight>
///
/// Indices are 1-based. Undirected edges are stored in both directions.
/// Duplicate edges are summed, or rejected in strict mode. In strict mode an
/// unweighted file may not carry weights and a weighted file must.
struct ParseOptions {
    bool strict = false;
};

struct NetworkHeader {
    int n_nodes = 0;
    int n_layers = 0;
    bool directed = false;
    bool weighted = false;
};

struct NetworkFile {
    NetworkHeader header;
    AdjacencyTensor tensor;
    std::size_t edge_records = 0;
    /// Total weight of the `couple` directives, if any.
    std::optional<double> coupling;
};

NetworkFile parse_network(std::istream& in, ParseOptions options = {});
inline AdjacencyTensor parse_edge_list(std::istream& in, ParseOptions options = {}) {
    return parse_network(in, options).tensor;
}
NetworkFile load_network(const std::filesystem::path& path, ParseOptions options = {});

/// Writes a tensor in the edge-list format. Symmetric tensors are written as
/// undirected (upper triangle only); the weighted flag is set when any weight
/// differs from 1. Weights are written with round-trip precision.
std::string serialize_edge_list(const AdjacencyTensor& a);

/// Adds `weight` at (i, l, i, k) for every node i and ordered layer pair l != k.
AdjacencyTensor add_interlayer_coupling(const AdjacencyTensor& a, double weight);

/// Number of edges: unordered pairs for a symmetric tensor, stored entries otherwise.
std::size_t edge_count(const AdjacencyTensor& a);

/// Five nodes on two layers with eleven undirected unit-weight edges:
/// layer 1 {1-2, 2-4, 3-5}, layer 2 {1-4, 2-3, 2-5}, and interlayer
/// (1,1)-(1,2), (1,1)-(3,2), (3,1)-(5,2), (4,1)-(2,2), (5,1)-(2,2).
AdjacencyTensor builtin_example1();

/// Names accepted by builtin_network.
std::vector<std::string> builtin_names();
NetworkFile builtin_network(std::string_view name);

struct RandomNetworkOptions {
    bool directed = false;
    bool weighted = false;
    double min_weight = 0.1;
    double max_weight = 1.0;
    std::uint64_t seed = 1;
};

/// `edge_total` distinct edges between distinct node-layer pairs, drawn
/// uniformly with a seeded generator. Weights are uniform in
/// [min_weight, max_weight) when weighted.
AdjacencyTensor random_network(int n_nodes, int n_layers, std::size_t edge_total,
                               const RandomNetworkOptions& options = {});

} // namespace mlcent
