#include "mlcent/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mlcent/error.hpp"

namespace mlcent {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

int parse_int(std::string_view tok, std::size_t line, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(tok) + "'", line);
    return value;
}

double parse_double(std::string_view tok, std::size_t line, const char* what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value))
        throw ParseError(std::string("expected finite number ") + what + ", got '" + std::string(tok) + "'", line);
    return value;
}

NetworkHeader parse_header(const std::vector<std::string_view>& tok, std::size_t line) {
    if (tok.size() != 5 || tok[0] != "mlnet")
        throw ParseError("expected header 'mlnet <N> <L> <directed|undirected> <weighted|unweighted>'", line);
    NetworkHeader h;
    h.n_nodes = parse_int(tok[1], line, "N");
    h.n_layers = parse_int(tok[2], line, "L");
    if (h.n_nodes < 1 || h.n_layers < 1) throw ParseError("N and L must be positive", line);
    if (tok[3] == "directed") h.directed = true;
    else if (tok[3] != "undirected") throw ParseError("expected 'directed' or 'undirected'", line);
    if (tok[4] == "weighted") h.weighted = true;
    else if (tok[4] != "unweighted") throw ParseError("expected 'weighted' or 'unweighted'", line);
    return h;
}

std::string format_weight(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return buf;
}

} // namespace

NetworkFile parse_network(std::istream& in, ParseOptions options) {
    std::optional<NetworkHeader> header;
    std::vector<TensorEntry> entries;
    // Canonical key -> line of first occurrence, for duplicate detection.
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;
    std::size_t records = 0;
    std::optional<double> coupling;

    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto tok = split_ws(raw);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (!header) {
            header = parse_header(tok, line);
            continue;
        }
        const auto& h = *header;
        if (tok[0] == "couple") {
            if (tok.size() != 2) throw ParseError("expected 'couple <weight>'", line);
            const double w = parse_double(tok[1], line, "coupling weight");
            if (!(w > 0.0)) throw ParseError("coupling weight must be positive", line);
            if (coupling && options.strict) throw ParseError("repeated couple directive", line);
            coupling = coupling.value_or(0.0) + w;
            continue;
        }
        if (tok.size() != 4 && tok.size() != 5)
            throw ParseError("expected '<node_i> <layer_i> <node_j> <layer_j> [<weight>]'", line);
        const TensorIndex from{parse_int(tok[0], line, "node"), parse_int(tok[1], line, "layer")};
        const TensorIndex to{parse_int(tok[2], line, "node"), parse_int(tok[3], line, "layer")};
        for (const auto& idx : {from, to})
            if (idx.node < 1 || idx.node > h.n_nodes || idx.layer < 1 || idx.layer > h.n_layers)
                throw DomainError("line " + std::to_string(line) + ": index (" + std::to_string(idx.node) + ", " +
                                  std::to_string(idx.layer) + ") outside declared N=" + std::to_string(h.n_nodes) +
                                  ", L=" + std::to_string(h.n_layers));

        double weight = 1.0;
        if (tok.size() == 5) {
            if (!h.weighted && options.strict) throw ParseError("weight given in an unweighted file", line);
            if (h.weighted) weight = parse_double(tok[4], line, "weight");
        } else if (h.weighted && options.strict) {
            throw ParseError("missing weight in a weighted file", line);
        }
        if (weight < 0.0)
            throw DomainError("line " + std::to_string(line) + ": edge weight must be nonnegative");
        ++records;

        auto a = flatten_index(from, h.n_nodes, h.n_layers);
        auto b = flatten_index(to, h.n_nodes, h.n_layers);
        if (!h.directed && b < a) std::swap(a, b);
        auto [it, inserted] = seen.emplace(std::pair{a, b}, line);
        if (!inserted && options.strict)
            throw ParseError("duplicate edge (first seen on line " + std::to_string(it->second) + ")", line);

        if (weight == 0.0) continue;
        entries.push_back({from, to, weight});
        if (!h.directed && !(from == to)) entries.push_back({to, from, weight});
    }
    if (!header) throw ParseError("missing 'mlnet' header", line);

    auto tensor = AdjacencyTensor::from_entries(header->n_nodes, header->n_layers, entries, DuplicatePolicy::Sum);
    if (coupling) tensor = add_interlayer_coupling(tensor, *coupling);
    return {*header, std::move(tensor), records, coupling};
}

NetworkFile load_network(const std::filesystem::path& path, ParseOptions options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return parse_network(in, options);
}

std::string serialize_edge_list(const AdjacencyTensor& a) {
    const bool undirected = a.is_symmetric();
    bool weighted = false;
    const auto entries = a.entries();
    for (const auto& e : entries) weighted = weighted || e.weight != 1.0;

    std::ostringstream out;
    out << "mlnet " << a.n_nodes() << ' ' << a.n_layers() << ' ' << (undirected ? "undirected" : "directed") << ' '
        << (weighted ? "weighted" : "unweighted") << '\n';
    for (const auto& e : entries) {
        if (undirected && flatten_index(e.to, a.n_nodes(), a.n_layers()) < flatten_index(e.from, a.n_nodes(), a.n_layers()))
            continue;
        out << e.from.node << ' ' << e.from.layer << ' ' << e.to.node << ' ' << e.to.layer;
        if (weighted) out << ' ' << format_weight(e.weight);
        out << '\n';
    }
    return out.str();
}

AdjacencyTensor add_interlayer_coupling(const AdjacencyTensor& a, double weight) {
    if (!(weight > 0.0) || !std::isfinite(weight)) throw DomainError("coupling weight must be positive and finite");
    auto entries = a.entries();
    for (int i = 1; i <= a.n_nodes(); ++i)
        for (int l = 1; l <= a.n_layers(); ++l)
            for (int k = 1; k <= a.n_layers(); ++k)
                if (l != k) entries.push_back({{i, l}, {i, k}, weight});
    return AdjacencyTensor::from_entries(a.n_nodes(), a.n_layers(), entries, DuplicatePolicy::Sum);
}

std::size_t edge_count(const AdjacencyTensor& a) {
    const auto nnz = static_cast<std::size_t>(a.nnz());
    if (!a.is_symmetric()) return nnz;
    std::size_t diagonal = 0;
    for (Eigen::Index r = 0; r < a.dimension(); ++r)
        if (a.matrix().coeff(r, r) != 0.0) ++diagonal;
    return (nnz + diagonal) / 2;
}

AdjacencyTensor builtin_example1() {
    const std::vector<std::pair<TensorIndex, TensorIndex>> edges = {
        {{1, 1}, {2, 1}}, {{2, 1}, {4, 1}}, {{3, 1}, {5, 1}},  // layer 1
        {{1, 2}, {4, 2}}, {{2, 2}, {3, 2}}, {{2, 2}, {5, 2}},  // layer 2
        {{1, 1}, {1, 2}}, {{1, 1}, {3, 2}}, {{3, 1}, {5, 2}}, {{4, 1}, {2, 2}}, {{5, 1}, {2, 2}},
    };
    std::vector<TensorEntry> entries;
    for (const auto& [u, v] : edges) {
        entries.push_back({u, v, 1.0});
        entries.push_back({v, u, 1.0});
    }
    return AdjacencyTensor::from_entries(5, 2, entries, DuplicatePolicy::Reject);
}

std::vector<std::string> builtin_names() { return {"example1"}; }

NetworkFile builtin_network(std::string_view name) {
    if (name == "example1") {
        auto t = builtin_example1();
        const auto records = edge_count(t);
        return {{5, 2, false, false}, std::move(t), records, std::nullopt};
    }
    throw DomainError("unknown builtin network '" + std::string(name) + "'");
}

AdjacencyTensor random_network(int n_nodes, int n_layers, std::size_t edge_total, const RandomNetworkOptions& options) {
    const auto n = static_cast<std::int64_t>(n_nodes) * n_layers;
    const auto possible = static_cast<std::size_t>(options.directed ? n * (n - 1) : n * (n - 1) / 2);
    if (edge_total > possible) throw DomainError("more edges requested than distinct pairs available");
    if (options.weighted && !(options.min_weight > 0.0 && options.max_weight > options.min_weight))
        throw DomainError("random weights need 0 < min_weight < max_weight");

    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::int64_t> pick(1, n);
    std::uniform_real_distribution<double> weight(options.min_weight, options.max_weight);
    std::set<std::pair<std::int64_t, std::int64_t>> chosen;
    std::vector<TensorEntry> entries;
    while (chosen.size() < edge_total) {
        auto a = pick(rng);
        auto b = pick(rng);
        if (a == b) continue;
        if (!options.directed && b < a) std::swap(a, b);
        if (!chosen.insert({a, b}).second) continue;
        const double w = options.weighted ? weight(rng) : 1.0;
        const auto from = unflatten_index(a, n_nodes, n_layers);
        const auto to = unflatten_index(b, n_nodes, n_layers);
        entries.push_back({from, to, w});
        if (!options.directed) entries.push_back({to, from, w});
    }
    return AdjacencyTensor::from_entries(n_nodes, n_layers, entries, DuplicatePolicy::Reject);
}

} // namespace mlcent
