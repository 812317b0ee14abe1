#include "mlcent/centrality.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mlcent/error.hpp"

namespace mlcent {

namespace {

void require_dense_feasible(const AdjacencyTensor& a, Eigen::Index cap) {
    if (a.dimension() > cap)
        throw SizeError("dense evaluation needs NL = " + std::to_string(a.dimension()) + " <= cap " +
                        std::to_string(cap) + "; use the Krylov mode instead");
}

std::vector<NodeScore> scores_from_flat(int n_nodes, int n_layers, const DenseVector& flat) {
    std::vector<NodeScore> out;
    out.reserve(static_cast<std::size_t>(flat.size()));
    for (Eigen::Index k = 0; k < flat.size(); ++k)
        out.push_back({unflatten_index(k + 1, n_nodes, n_layers), flat[k]});
    return out;
}

void require_finite(const std::vector<NodeScore>& scores) {
    for (const auto& s : scores)
        if (!std::isfinite(s.score)) throw NumericError("centrality score is not finite");
}

// Global Arnoldi on E with m capped at NL.
KrylovApproximation krylov_times_ones(const AdjacencyTensor& a, const FunctionSpec& spec, int m) {
    const int steps = static_cast<int>(std::min<Eigen::Index>(m, a.dimension()));
    return approx_function_times_block(a, BlockVector::ones(a.n_nodes(), a.n_layers()), steps, spec);
}

CentralityReport row_sum_report(const AdjacencyTensor& a, MeasureKind kind, const FunctionSpec& spec,
                                const EvalMode& mode, ShiftConvention shift) {
    CentralityReport report;
    report.kind = kind;
    report.function = spec;
    report.mode = mode;
    report.shift = shift;
    DenseVector flat;
    if (mode.is_exact()) {
        flat = exact_tensor_function(a, spec, mode.dense_cap).rowwise().sum();
    } else {
        if (mode.m < 1) throw DomainError("Krylov mode needs m >= 1");
        const auto approx = krylov_times_ones(a, spec, mode.m);
        flat = approx.value.flat();
        report.krylov_steps = approx.steps;
        report.breakdown = approx.breakdown;
    }
    report.scores = scores_from_flat(a.n_nodes(), a.n_layers(), flat);
    require_finite(report.scores);
    report.ranking = rank(report.scores);
    return report;
}

} // namespace

double CentralityReport::score(TensorIndex at) const {
    for (const auto& s : scores)
        if (s.index == at) return s.score;
    throw DomainError("no score for node " + std::to_string(at.node) + " layer " + std::to_string(at.layer));
}

std::vector<TensorIndex> rank(std::span<const NodeScore> scores) {
    std::vector<NodeScore> sorted(scores.begin(), scores.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const NodeScore& x, const NodeScore& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.index < y.index;
    });
    std::vector<TensorIndex> out;
    out.reserve(sorted.size());
    for (const auto& s : sorted) out.push_back(s.index);
    return out;
}

FunctionSpec measure_function(MeasureKind kind, double parameter, ShiftConvention shift) {
    const bool shifted = shift == ShiftConvention::Shifted;
    switch (kind) {
    case MeasureKind::TotalCommunicability:
    case MeasureKind::TotalNetworkCommunicability:
    case MeasureKind::SubgraphExp:
        return shifted ? FunctionSpec::exp0(parameter) : FunctionSpec::exp(parameter);
    case MeasureKind::Katz:
    case MeasureKind::SubgraphRes:
        return shifted ? FunctionSpec::resolvent0(parameter) : FunctionSpec::resolvent(parameter);
    case MeasureKind::PairCommunicability:
        break;
    }
    throw DomainError("pair communicability takes an explicit function");
}

std::optional<double> check_resolvent_convergence(const AdjacencyTensor& a, double alpha) {
    if (a.is_zero()) return std::nullopt;
    const double lambda = estimate_lambda_max(a).lambda_max;
    if (!(alpha * std::abs(lambda) < 1.0))
        throw DomainError("alpha = " + std::to_string(alpha) + " is outside the convergence range: alpha * " +
                          "lambda_max = " + std::to_string(alpha * std::abs(lambda)) + " >= 1 (lambda_max = " +
                          std::to_string(lambda) + ")");
    return lambda;
}

double relative_alpha(const AdjacencyTensor& a, double c) {
    if (!(c > 0.0)) throw DomainError("relative alpha needs c > 0");
    return c / std::abs(estimate_lambda_max(a).lambda_max);
}

DenseMatrix exact_tensor_function(const AdjacencyTensor& a, const FunctionSpec& spec, Eigen::Index dense_cap) {
    spec.validate();
    require_dense_feasible(a, dense_cap);
    const DenseMatrix h = a.matrix();
    if (spec.is_resolvent()) {
        check_resolvent_convergence(a, spec.alpha);
        DenseMatrix r = dense_resolvent(h, spec.alpha, false);
        if (spec.kind == FunctionKind::Resolvent0) r -= DenseMatrix::Identity(h.rows(), h.cols());
        return r;
    }
    return apply_spec(h, spec);
}

CentralityReport total_communicability_per_node(const AdjacencyTensor& a, double beta, const EvalMode& mode,
                                                ShiftConvention shift) {
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    const auto spec = measure_function(MeasureKind::TotalCommunicability, beta, shift);
    return row_sum_report(a, MeasureKind::TotalCommunicability, spec, mode, shift);
}

CentralityReport katz_centrality(const AdjacencyTensor& a, double alpha, const EvalMode& mode,
                                 ShiftConvention shift) {
    const auto spec = measure_function(MeasureKind::Katz, alpha, shift);
    const auto lambda = check_resolvent_convergence(a, alpha);
    auto report = row_sum_report(a, MeasureKind::Katz, spec, mode, shift);
    report.lambda_max = lambda;
    return report;
}

CentralityReport subgraph_centralities(const AdjacencyTensor& a, std::span<const TensorIndex> nodes,
                                       const FunctionSpec& spec, const EvalMode& mode) {
    spec.validate();
    if (nodes.empty()) throw DomainError("subgraph centralities need at least one node");
    std::vector<Eigen::Index> flat_index;
    flat_index.reserve(nodes.size());
    for (const auto& idx : nodes) flat_index.push_back(flatten_index(idx, a.n_nodes(), a.n_layers()) - 1);

    CentralityReport report;
    report.kind = spec.is_resolvent() ? MeasureKind::SubgraphRes : MeasureKind::SubgraphExp;
    report.function = spec;
    report.mode = mode;
    report.shift = (spec.kind == FunctionKind::Exp0 || spec.kind == FunctionKind::Resolvent0)
                       ? ShiftConvention::Shifted
                       : ShiftConvention::Unshifted;
    if (spec.is_resolvent()) report.lambda_max = check_resolvent_convergence(a, spec.alpha);

    const auto count = static_cast<Eigen::Index>(nodes.size());
    // columns.col(s) = f(A) *_2 E_s, flattened.
    DenseMatrix columns(a.dimension(), count);
    if (mode.is_exact()) {
        const DenseMatrix f = exact_tensor_function(a, spec, mode.dense_cap);
        for (Eigen::Index s = 0; s < count; ++s) columns.col(s) = f.col(flat_index[static_cast<std::size_t>(s)]);
    } else {
        if (mode.m < 1) throw DomainError("Krylov mode needs m >= 1");
        if (mode.block_size < 1) throw DomainError("block size must be >= 1");
        for (Eigen::Index begin = 0; begin < count; begin += mode.block_size) {
            const Eigen::Index width = std::min<Eigen::Index>(mode.block_size, count - begin);
            const auto batch = BlockTensor::selectors(a.n_nodes(), a.n_layers(),
                                                      nodes.subspan(static_cast<std::size_t>(begin),
                                                                    static_cast<std::size_t>(width)));
            const auto approx = block_approx_function(a, batch, mode.m, spec, mode.augment);
            columns.middleCols(begin, width) = approx.value.columns();
            report.krylov_steps = std::max(report.krylov_steps, approx.steps);
            report.breakdown = report.breakdown || approx.breakdown;
        }
    }

    DenseMatrix pairwise(count, count);
    for (Eigen::Index r = 0; r < count; ++r)
        for (Eigen::Index s = 0; s < count; ++s) pairwise(r, s) = columns(flat_index[static_cast<std::size_t>(r)], s);
    report.scores.reserve(nodes.size());
    for (Eigen::Index r = 0; r < count; ++r) report.scores.push_back({nodes[static_cast<std::size_t>(r)], pairwise(r, r)});
    require_finite(report.scores);
    report.pairwise = std::move(pairwise);
    report.ranking = rank(report.scores);
    return report;
}

double total_network_communicability(const AdjacencyTensor& a, double beta, const EvalMode& mode,
                                     ShiftConvention shift) {
    const auto report = total_communicability_per_node(a, beta, mode, shift);
    double total = 0.0;
    for (const auto& s : report.scores) total += s.score;
    return total;
}

double pair_communicability(const AdjacencyTensor& a, TensorIndex from, TensorIndex to, const FunctionSpec& spec,
                            const EvalMode& mode) {
    const std::array<TensorIndex, 2> pair = {from, to};
    const auto report = subgraph_centralities(a, std::span<const TensorIndex>(pair), spec, mode);
    return (*report.pairwise)(0, 1);
}

std::vector<TensorIndex> all_node_layers(int n_nodes, int n_layers) {
    std::vector<TensorIndex> out;
    out.reserve(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_layers));
    for (int l = 1; l <= n_layers; ++l)
        for (int i = 1; i <= n_nodes; ++i) out.push_back({i, l});
    return out;
}

std::string to_string(MeasureKind kind) {
    switch (kind) {
    case MeasureKind::TotalCommunicability: return "mtc";
    case MeasureKind::TotalNetworkCommunicability: return "tnc";
    case MeasureKind::Katz: return "mkc";
    case MeasureKind::SubgraphExp: return "msc-exp";
    case MeasureKind::SubgraphRes: return "msc-res";
    case MeasureKind::PairCommunicability: return "pair";
    }
    return "unknown";
}

std::string to_string(ShiftConvention shift) {
    return shift == ShiftConvention::Shifted ? "shifted" : "unshifted";
}

} // namespace mlcent
