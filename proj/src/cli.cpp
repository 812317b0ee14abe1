#include "mlcent/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "mlcent/error.hpp"

namespace mlcent::cli {

using nlohmann::ordered_json;

namespace {

std::string fixed(double x, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return buf;
}

// Decimal rounding through the printed representation, so the value written
// to JSON equals the value the CSV shows.
double rounded(double x, int precision) { return std::strtod(fixed(x, precision).c_str(), nullptr); }

double parse_number(std::string_view text, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw DomainError(std::string("invalid ") + what + " '" + std::string(text) + "'");
    return v;
}

bool uses_alpha(MeasureKind kind) { return kind == MeasureKind::Katz || kind == MeasureKind::SubgraphRes; }
bool is_subgraph(MeasureKind kind) { return kind == MeasureKind::SubgraphExp || kind == MeasureKind::SubgraphRes; }

struct ResolvedParameters {
    double parameter = 0.0;  // alpha or beta, depending on the measure
    std::optional<double> lambda_max;
};

ResolvedParameters resolve(const RunConfig& config, const AdjacencyTensor& a) {
    ResolvedParameters out;
    if (!uses_alpha(config.measure)) {
        out.parameter = config.beta;
        return out;
    }
    if (config.alpha.relative) {
        const double lambda = estimate_lambda_max(a).lambda_max;
        out.lambda_max = lambda;
        out.parameter = config.alpha.value / std::abs(lambda);
    } else {
        out.parameter = config.alpha.value;
    }
    return out;
}

CentralityReport compute(const RunConfig& config, const AdjacencyTensor& a, double parameter, const EvalMode& mode) {
    switch (config.measure) {
    case MeasureKind::TotalCommunicability:
        return total_communicability_per_node(a, parameter, mode, config.shift);
    case MeasureKind::Katz:
        return katz_centrality(a, parameter, mode, config.shift);
    case MeasureKind::SubgraphExp:
    case MeasureKind::SubgraphRes: {
        const auto nodes = config.nodes.empty() ? all_node_layers(a.n_nodes(), a.n_layers()) : config.nodes;
        return subgraph_centralities(a, nodes, measure_function(config.measure, parameter, config.shift), mode);
    }
    case MeasureKind::TotalNetworkCommunicability:
    case MeasureKind::PairCommunicability:
        break;
    }
    throw DomainError("measure '" + to_string(config.measure) + "' cannot be ranked; use mtc, mkc, msc-exp or msc-res");
}

std::vector<TensorIndex> top_k(const std::vector<TensorIndex>& ranking, int k) {
    return {ranking.begin(), ranking.begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(ranking.size()))};
}

EvalMode krylov_mode(const RunConfig& config, int m) {
    auto mode = EvalMode::krylov(m, config.block_size, config.augment);
    mode.dense_cap = config.dense_cap;
    return mode;
}

EvalMode exact_mode(const RunConfig& config) {
    auto mode = EvalMode::exact();
    mode.dense_cap = config.dense_cap;
    return mode;
}

struct KrylovRun {
    CentralityReport report;
    int m = 0;
    bool stabilized = false;
};

KrylovRun run_krylov(const RunConfig& config, const AdjacencyTensor& a, double parameter) {
    if (!config.stabilize) return {compute(config, a, parameter, krylov_mode(config, config.m)), config.m, false};
    std::optional<CentralityReport> previous;
    for (int m = 1; m <= config.m; ++m) {
        auto report = compute(config, a, parameter, krylov_mode(config, m));
        if (previous && top_k(previous->ranking, config.top) == top_k(report.ranking, config.top))
            return {std::move(report), m, true};
        previous = std::move(report);
    }
    return {std::move(*previous), config.m, false};
}

ordered_json index_json(TensorIndex idx) { return {{"node", idx.node}, {"layer", idx.layer}}; }

ordered_json config_json(const RunConfig& config, const NetworkFile& net, const ResolvedParameters& params) {
    ordered_json c;
    c["input"] = config.builtin ? "builtin:" + *config.builtin : config.input->generic_string();
    c["n_nodes"] = net.tensor.n_nodes();
    c["n_layers"] = net.tensor.n_layers();
    c["measure"] = to_string(config.measure);
    c["mode"] = to_string(config.mode);
    if (uses_alpha(config.measure)) {
        c["alpha_spec"] = config.alpha.str();
        c["alpha"] = params.parameter;
    } else {
        c["beta"] = params.parameter;
    }
    c["shift"] = to_string(config.shift);
    if (config.mode != RunMode::Exact) {
        c["m"] = config.m;
        if (is_subgraph(config.measure)) {
            c["block_size"] = config.block_size;
            c["augment"] = to_string(config.augment);
        }
        c["stabilize"] = config.stabilize;
    }
    c["top"] = config.top;
    c["precision"] = config.precision;
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// Parsing helpers

AlphaSpec AlphaSpec::parse(std::string_view text) {
    AlphaSpec spec;
    constexpr std::string_view suffix = "rel";
    if (text.size() > suffix.size() && text.substr(text.size() - suffix.size()) == suffix) {
        spec.relative = true;
        spec.value = parse_number(text.substr(0, text.size() - suffix.size()), "relative alpha");
    } else {
        spec.relative = false;
        spec.value = parse_number(text, "alpha");
    }
    if (!(spec.value > 0.0)) throw DomainError("alpha must be positive");
    return spec;
}

std::string AlphaSpec::str() const {
    std::ostringstream out;
    out << value;
    if (relative) out << "rel";
    return out.str();
}

void RunConfig::validate() const {
    if (input.has_value() == builtin.has_value()) throw DomainError("give exactly one of --input or --builtin");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
    if (m < 1) throw DomainError("m must be >= 1");
    if (block_size < 1) throw DomainError("block size must be >= 1");
    if (precision < 0 || precision > 17) throw DomainError("precision must be in [0, 17]");
    if (top < 1) throw DomainError("top must be >= 1");
    if (m_max < 1) throw DomainError("m-max must be >= 1");
    if (stabilize && mode == RunMode::Exact) throw DomainError("--stabilize needs krylov or both mode");
    if (!nodes.empty() && !is_subgraph(measure)) throw DomainError("--nodes applies to msc-exp and msc-res only");
}

MeasureKind parse_measure(std::string_view name) {
    if (name == "mtc") return MeasureKind::TotalCommunicability;
    if (name == "mkc") return MeasureKind::Katz;
    if (name == "msc-exp") return MeasureKind::SubgraphExp;
    if (name == "msc-res") return MeasureKind::SubgraphRes;
    throw DomainError("unknown measure '" + std::string(name) + "' (expected mtc, mkc, msc-exp, msc-res)");
}

RunMode parse_mode(std::string_view name) {
    if (name == "exact") return RunMode::Exact;
    if (name == "krylov") return RunMode::Krylov;
    if (name == "both") return RunMode::Both;
    throw DomainError("unknown mode '" + std::string(name) + "' (expected exact, krylov, both)");
}

Augmentation parse_augmentation(std::string_view name) {
    if (name == "none") return Augmentation::None;
    if (name == "ones") return Augmentation::Ones;
    if (name == "random") return Augmentation::Random;
    throw DomainError("unknown augmentation '" + std::string(name) + "' (expected none, ones, random)");
}

std::vector<TensorIndex> parse_node_list(std::string_view text) {
    std::vector<TensorIndex> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw DomainError("node list entries must look like node:layer");
        const double node = parse_number(item.substr(0, colon), "node");
        const double layer = parse_number(item.substr(colon + 1), "layer");
        if (node != std::floor(node) || layer != std::floor(layer)) throw DomainError("node and layer must be integers");
        out.push_back({static_cast<int>(node), static_cast<int>(layer)});
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

std::string to_string(RunMode mode) {
    switch (mode) {
    case RunMode::Exact: return "exact";
    case RunMode::Krylov: return "krylov";
    case RunMode::Both: return "both";
    }
    return "unknown";
}

std::string to_string(Augmentation augment) {
    switch (augment) {
    case Augmentation::None: return "none";
    case Augmentation::Ones: return "ones";
    case Augmentation::Random: return "random";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_json(const ReportDocument& doc, int precision) {
    ordered_json j;
    j["config"] = doc.config;
    auto& scores = j["scores"] = ordered_json::array();
    for (const auto& row : doc.scores) {
        ordered_json r = index_json(row.index);
        r["score"] = rounded(row.score, precision);
        if (row.krylov) r["krylov"] = rounded(*row.krylov, precision);
        scores.push_back(std::move(r));
    }
    auto& ranking = j["ranking"] = ordered_json::array();
    for (const auto& idx : doc.ranking) ranking.push_back(index_json(idx));
    if (!doc.diagnostics.is_null()) j["diagnostics"] = doc.diagnostics;
    return j.dump(2) + "\n";
}

ReportDocument parse_report_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid report JSON: ") + e.what());
    }
    try {
        ReportDocument doc;
        doc.config = j.at("config");
        for (const auto& r : j.at("scores")) {
            ReportRow row{{r.at("node").get<int>(), r.at("layer").get<int>()}, r.at("score").get<double>(), {}};
            if (r.contains("krylov")) row.krylov = r.at("krylov").get<double>();
            doc.scores.push_back(row);
        }
        for (const auto& r : j.at("ranking")) doc.ranking.push_back({r.at("node").get<int>(), r.at("layer").get<int>()});
        if (j.contains("diagnostics")) doc.diagnostics = j.at("diagnostics");
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report JSON does not match the schema: ") + e.what());
    }
}

std::string to_csv(const ReportDocument& doc, int precision) {
    const bool both = !doc.scores.empty() && doc.scores.front().krylov.has_value();
    std::ostringstream out;
    out << (both ? "rank,node,layer,exact,krylov,abs_diff\n" : "rank,node,layer,score\n");
    int position = 0;
    for (const auto& idx : doc.ranking) {
        const auto it = std::find_if(doc.scores.begin(), doc.scores.end(),
                                     [&](const ReportRow& r) { return r.index == idx; });
        if (it == doc.scores.end()) throw DomainError("ranking refers to a node without a score");
        out << ++position << ',' << idx.node << ',' << idx.layer << ',' << fixed(it->score, precision);
        if (both)
            out << ',' << fixed(*it->krylov, precision) << ',' << fixed(std::abs(it->score - *it->krylov), precision);
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Commands

NetworkFile load_input(const RunConfig& config) {
    if (config.builtin) return builtin_network(*config.builtin);
    if (!config.input) throw DomainError("no input given");
    return load_network(*config.input, {config.strict});
}

ReportDocument run_rank(const RunConfig& config) {
    config.validate();
    const auto net = load_input(config);
    const auto& a = net.tensor;
    if (a.is_zero()) throw DomainError("zero tensor: the network has no edges");
    const auto params = resolve(config, a);

    ReportDocument doc;
    doc.config = config_json(config, net, params);
    ordered_json diag = ordered_json::object();
    if (params.lambda_max) diag["lambda_max"] = *params.lambda_max;

    std::optional<CentralityReport> exact;
    std::optional<KrylovRun> krylov;
    if (config.mode != RunMode::Krylov) exact = compute(config, a, params.parameter, exact_mode(config));
    if (config.mode != RunMode::Exact) krylov = run_krylov(config, a, params.parameter);

    const CentralityReport& primary = exact ? *exact : krylov->report;
    if (!diag.contains("lambda_max") && primary.lambda_max) diag["lambda_max"] = *primary.lambda_max;
    for (std::size_t k = 0; k < primary.scores.size(); ++k) {
        ReportRow row{primary.scores[k].index, primary.scores[k].score, {}};
        if (exact && krylov) row.krylov = krylov->report.scores[k].score;
        doc.scores.push_back(row);
    }
    doc.ranking = top_k(primary.ranking, config.top);

    if (!is_subgraph(config.measure)) {
        double total = 0.0;
        for (const auto& s : primary.scores) total += s.score;
        diag["total"] = total;
    }
    if (krylov) {
        diag["krylov_steps"] = krylov->report.krylov_steps;
        diag["breakdown"] = krylov->report.breakdown;
        if (config.stabilize) {
            diag["stabilized"] = krylov->stabilized;
            diag["stabilized_m"] = krylov->m;
        }
    }
    if (exact && krylov) {
        double discrepancy = 0.0;
        for (const auto& row : doc.scores) discrepancy = std::max(discrepancy, std::abs(row.score - *row.krylov));
        diag["inf_norm_discrepancy"] = discrepancy;
        diag["krylov_ranking"] = ordered_json::array();
        for (const auto& idx : top_k(krylov->report.ranking, config.top))
            diag["krylov_ranking"].push_back(index_json(idx));
    }
    if (primary.pairwise && primary.scores.size() > 1) {
        auto& pairs = diag["pairwise"] = ordered_json::array();
        for (std::size_t r = 0; r < primary.scores.size(); ++r)
            for (std::size_t s = 0; s < primary.scores.size(); ++s) {
                if (r == s) continue;
                pairs.push_back({{"from", index_json(primary.scores[r].index)},
                                 {"to", index_json(primary.scores[s].index)},
                                 {"value", rounded((*primary.pairwise)(static_cast<Eigen::Index>(r),
                                                                       static_cast<Eigen::Index>(s)),
                                                   config.precision)}});
            }
    }
    doc.diagnostics = std::move(diag);
    return doc;
}

std::string cmd_rank(const RunConfig& config) {
    const auto doc = run_rank(config);
    return config.format == OutputFormat::Json ? to_json(doc, config.precision) : to_csv(doc, config.precision);
}

std::vector<ConvergencePoint> run_convergence(const RunConfig& config) {
    config.validate();
    const auto net = load_input(config);
    const auto& a = net.tensor;
    if (a.is_zero()) throw DomainError("zero tensor: the network has no edges");
    if (a.dimension() > config.dense_cap)
        throw SizeError("convergence needs an exact reference but NL = " + std::to_string(a.dimension()) +
                        " exceeds the dense cap " + std::to_string(config.dense_cap) +
                        "; use 'rank --mode krylov --stabilize' instead");
    const auto params = resolve(config, a);
    const auto exact = compute(config, a, params.parameter, exact_mode(config));

    std::vector<ConvergencePoint> out;
    for (int m = 1; m <= config.m_max; ++m) {
        const auto approx = compute(config, a, params.parameter, krylov_mode(config, m));
        double error = 0.0;
        for (std::size_t k = 0; k < exact.scores.size(); ++k)
            error = std::max(error, std::abs(exact.scores[k].score - approx.scores[k].score));
        out.push_back({m, error, approx.breakdown});
    }
    return out;
}

std::string cmd_convergence(const RunConfig& config) {
    const auto points = run_convergence(config);
    if (config.format == OutputFormat::Json) {
        const auto net = load_input(config);
        ordered_json j;
        j["config"] = config_json(config, net, resolve(config, net.tensor));
        j["config"]["m_max"] = config.m_max;
        auto& rows = j["convergence"] = ordered_json::array();
        for (const auto& p : points) rows.push_back({{"m", p.m}, {"error", p.error}, {"breakdown", p.breakdown}});
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "m,inf_error,breakdown\n";
    char buf[64];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.6e", p.error);
        out << p.m << ',' << buf << ',' << (p.breakdown ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string cmd_info(const RunConfig& config) {
    if (config.input.has_value() == config.builtin.has_value())
        throw DomainError("give exactly one of --input or --builtin");
    const auto net = load_input(config);
    const auto& a = net.tensor;
    const double size = static_cast<double>(a.dimension());

    ordered_json j;
    j["input"] = config.builtin ? "builtin:" + *config.builtin : config.input->generic_string();
    j["n_nodes"] = a.n_nodes();
    j["n_layers"] = a.n_layers();
    j["directed"] = net.header.directed;
    j["weighted"] = net.header.weighted;
    j["edges"] = edge_count(a);
    j["stored_entries"] = a.nnz();
    j["symmetric"] = a.is_symmetric();
    j["density"] = static_cast<double>(a.nnz()) / (size * size);
    if (net.coupling) j["coupling"] = *net.coupling;
    try {
        const auto estimate = estimate_lambda_max(a);
        j["lambda_max"] = estimate.lambda_max;
        j["lambda_residual"] = estimate.residual;
        j["lambda_iterations"] = estimate.iterations;
    } catch (const Error& e) {
        j["lambda_max"] = nullptr;
        j["lambda_error"] = e.what();
    }

    if (config.format == OutputFormat::Json) return j.dump(2) + "\n";
    std::ostringstream out;
    out << "field,value\n";
    for (const auto& [key, value] : j.items()) {
        out << key << ',';
        if (value.is_string()) out << value.get<std::string>();
        else if (value.is_null()) out << "NA";
        else out << value.dump();
        out << '\n';
    }
    return out.str();
}

} // namespace mlcent::cli
