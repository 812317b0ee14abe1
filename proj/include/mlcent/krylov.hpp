#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlcent/matrix_functions.hpp"
#include "mlcent/tensor.hpp"

namespace mlcent {

/// Relative threshold on the subdiagonal below which a Krylov step is treated
/// as a breakdown: h <= kBreakdownTolerance * max(1, ||A||_F).
inline constexpr double kBreakdownTolerance = 1e-12;

/// Output of the global Arnoldi process over N x L blocks with the trace
/// inner product.
struct GlobalKrylovDecomposition {
    /// V_1 .. V_{k+1}, or V_1 .. V_k after a breakdown at step k.
    std::vector<BlockVector> basis;
    /// (k+1) x k upper Hessenberg; the last row is zero after a breakdown.
    DenseMatrix hessenberg;
    /// ||V||_F of the starting block.
    double v_norm = 0.0;
    std::optional<int> breakdown_at;

    /// Completed steps k.
    int steps() const noexcept { return static_cast<int>(hessenberg.cols()); }
    /// Leading k x k block H_k.
    DenseMatrix square_hessenberg() const { return hessenberg.topRows(hessenberg.cols()); }
    /// The basis as an NL x (basis size) matrix of flattened blocks.
    DenseMatrix basis_matrix() const;
};

GlobalKrylovDecomposition global_arnoldi(const AdjacencyTensor& a, const BlockVector& v, int m);

/// Result of a Krylov approximation of f(A) *_2 V.
struct KrylovApproximation {
    BlockVector value;
    int steps = 0;
    bool breakdown = false;
};

/// V_k f(H_k) e_1 ||V||_F from k <= m global Arnoldi steps.
KrylovApproximation approx_function_times_block(const AdjacencyTensor& a, const BlockVector& v, int m,
                                                const FunctionSpec& spec);
/// Same read-out from an existing decomposition.
BlockVector function_times_block(const GlobalKrylovDecomposition& decomposition, const FunctionSpec& spec);

/// Thin QR of the flattened slices of W with column-wise rank detection.
/// Q holds `rank` orthonormal columns; r_factor is rank x R and upper
/// staircase with nonnegative pivots, so Q * r_factor reproduces W.
struct BlockQR {
    DenseMatrix q;
    DenseMatrix r_factor;
    int rank = 0;
    /// Input columns that were found linearly dependent on earlier ones.
    std::vector<int> dependent_columns;
};

/// `drop_tolerance` < 0 selects 1e-12 times the largest column norm of W.
BlockQR block_qr(const DenseMatrix& w, double drop_tolerance = -1.0);
inline BlockQR block_qr(const BlockTensor& w, double drop_tolerance = -1.0) {
    return block_qr(w.columns(), drop_tolerance);
}

/// A step at which the block QR lost rank.
struct Deflation {
    int step = 0;          ///< 0 for the initial factorization
    int width_before = 0;  ///< block width entering the QR
    int width_after = 0;   ///< numerical rank found
};

/// Output of the block Arnoldi process. Blocks may shrink when a QR reveals
/// rank deficiency; `block_widths[j]` is the width of block j+1.
struct BlockKrylovDecomposition {
    int n_nodes = 0;
    int n_layers = 0;
    int block_size = 0;                ///< R of the starting tensor
    std::vector<int> block_widths;     ///< widths of V_1 .. V_{k+1}
    DenseMatrix basis;                 ///< NL x sum(block_widths), blocks side by side
    DenseMatrix block_hessenberg;      ///< sum(widths 1..k+1) x sum(widths 1..k)
    DenseMatrix chi0;                  ///< width(V_1) x R, V = V_1 * chi0
    std::optional<int> breakdown_at;   ///< first step with a deflation or full breakdown
    std::vector<Deflation> deflations;

    int steps() const noexcept { return static_cast<int>(block_widths.size()) - 1; }
    /// Column offset of block j (1-based) inside `basis`.
    Eigen::Index block_offset(int j) const;
    /// Columns spanned by V_1 .. V_k.
    Eigen::Index leading_columns() const { return block_hessenberg.cols(); }
    DenseMatrix square_hessenberg() const { return block_hessenberg.topRows(block_hessenberg.cols()); }
    DenseMatrix leading_basis() const { return basis.leftCols(leading_columns()); }
    BlockTensor block(int j) const;
};

BlockKrylovDecomposition block_arnoldi(const AdjacencyTensor& a, const BlockTensor& v, int m);

/// Extra slice appended to the starting tensor of the block process.
enum class Augmentation { None, Ones, Random };

/// Seed of the uniform(0,1) slice used by Augmentation::Random.
inline constexpr std::uint64_t kAugmentationSeed = 20240601;

struct BlockApproximation {
    BlockTensor value;  ///< f(A) *_2 V for the R requested slices
    int steps = 0;
    bool breakdown = false;
    std::vector<Deflation> deflations;
};

/// V_m f(H_m) E_1 chi0; augmented slices are dropped from the result.
BlockApproximation block_approx_function(const AdjacencyTensor& a, const BlockTensor& v, int m,
                                         const FunctionSpec& spec, Augmentation augment = Augmentation::None);
/// Same read-out from an existing decomposition.
DenseMatrix block_function_times_start(const BlockKrylovDecomposition& decomposition, const FunctionSpec& spec);

} // namespace mlcent
