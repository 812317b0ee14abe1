#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlcent/krylov.hpp"
#include "mlcent/matrix_functions.hpp"
#include "mlcent/tensor.hpp"

namespace mlcent {

enum class MeasureKind {
    TotalCommunicability,         ///< MTC: E_{i,l} *_2 exp(bA) *_2 E
    TotalNetworkCommunicability,  ///< E *_2 exp(bA) *_2 E
    Katz,                         ///< MKC: E_{i,l} *_2 (I - aA)^{-1} *_2 E
    SubgraphExp,                  ///< MSC_exp: E_{i,l} *_2 exp(bA) *_2 E_{i,l}
    SubgraphRes,                  ///< MSC_res: E_{i,l} *_2 (I - aA)^{-1} *_2 E_{i,l}
    PairCommunicability           ///< E_{i,l} *_2 f(A) *_2 E_{j,k}
};

/// Whether the identity term is kept in the read-out. Unshifted uses exp and
/// (I - aA)^{-1}; Shifted subtracts the identity (exp_0 and res_0). The two
/// differ by 1 per node for total communicability and on the diagonal for
/// subgraph centrality.
enum class ShiftConvention { Unshifted, Shifted };

inline constexpr Eigen::Index kDefaultDenseCap = 5000;
inline constexpr int kDefaultBlockSize = 10;

/// How a measure is evaluated: dense flattening or Krylov projection.
struct EvalMode {
    enum class Kind { Exact, Krylov } kind = Kind::Exact;
    int m = 10;                               ///< Krylov steps
    int block_size = kDefaultBlockSize;       ///< R for the block process
    Augmentation augment = Augmentation::None;
    Eigen::Index dense_cap = kDefaultDenseCap;

    static EvalMode exact() { return {}; }
    static EvalMode krylov(int m, int block_size = kDefaultBlockSize, Augmentation augment = Augmentation::None) {
        return {Kind::Krylov, m, block_size, augment, kDefaultDenseCap};
    }
    bool is_exact() const noexcept { return kind == Kind::Exact; }
};

struct NodeScore {
    TensorIndex index;
    double score = 0.0;
};

struct CentralityReport {
    MeasureKind kind = MeasureKind::TotalCommunicability;
    FunctionSpec function;
    EvalMode mode;
    ShiftConvention shift = ShiftConvention::Unshifted;
    /// Dominant eigenvalue used to validate alpha, when a resolvent was involved.
    std::optional<double> lambda_max;

    std::vector<NodeScore> scores;
    std::vector<TensorIndex> ranking;
    /// Subgraph reports: pairwise[r][s] = E_r *_2 f(A) *_2 E_s over the
    /// nodes of `scores`, in the same order.
    std::optional<DenseMatrix> pairwise;

    int krylov_steps = 0;
    bool breakdown = false;

    /// Throws DomainError if `at` has no score.
    double score(TensorIndex at) const;
};

/// Descending by score, ties by ascending (layer, node).
std::vector<TensorIndex> rank(std::span<const NodeScore> scores);

FunctionSpec measure_function(MeasureKind kind, double parameter, ShiftConvention shift);

/// f(mat(A)) as a dense NL x NL matrix. Resolvent specs are checked against
/// the dominant eigenvalue of A first.
DenseMatrix exact_tensor_function(const AdjacencyTensor& a, const FunctionSpec& spec,
                                  Eigen::Index dense_cap = kDefaultDenseCap);

/// Estimates lambda_max and throws DomainError unless alpha * |lambda_max| < 1.
/// Returns the estimate, or nothing for the zero tensor.
std::optional<double> check_resolvent_convergence(const AdjacencyTensor& a, double alpha);

/// alpha = c / |lambda_max|.
double relative_alpha(const AdjacencyTensor& a, double c);

CentralityReport total_communicability_per_node(const AdjacencyTensor& a, double beta, const EvalMode& mode,
                                                ShiftConvention shift = ShiftConvention::Unshifted);

CentralityReport katz_centrality(const AdjacencyTensor& a, double alpha, const EvalMode& mode,
                                 ShiftConvention shift = ShiftConvention::Unshifted);

/// Diagonal read-outs for the listed nodes, plus the pairwise matrix. In
/// Krylov mode nodes are processed through the block process in batches of
/// mode.block_size.
CentralityReport subgraph_centralities(const AdjacencyTensor& a, std::span<const TensorIndex> nodes,
                                       const FunctionSpec& spec, const EvalMode& mode);

double total_network_communicability(const AdjacencyTensor& a, double beta, const EvalMode& mode,
                                     ShiftConvention shift = ShiftConvention::Unshifted);

double pair_communicability(const AdjacencyTensor& a, TensorIndex from, TensorIndex to, const FunctionSpec& spec,
                            const EvalMode& mode);

/// All N*L node-layer pairs in flattened order.
std::vector<TensorIndex> all_node_layers(int n_nodes, int n_layers);

std::string to_string(MeasureKind kind);
std::string to_string(ShiftConvention shift);

} // namespace mlcent
