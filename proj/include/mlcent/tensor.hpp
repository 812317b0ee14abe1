#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace mlcent {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

/// A node-layer pair. Both coordinates are 1-based.
struct TensorIndex {
    int node = 1;
    int layer = 1;

    friend bool operator==(const TensorIndex&, const TensorIndex&) = default;
    /// Orders by (layer, node), the tie-break order used for rankings.
    friend std::strong_ordering operator<=>(const TensorIndex& a, const TensorIndex& b) {
        if (auto c = a.layer <=> b.layer; c != 0) return c;
        return a.node <=> b.node;
    }
};

/// Position of (node, layer) in the flattened ordering, 1-based:
/// node + (layer - 1) * n_nodes. Node varies fastest.
std::int64_t flatten_index(TensorIndex idx, int n_nodes, int n_layers);

/// Inverse of flatten_index for k in [1, n_nodes * n_layers].
TensorIndex unflatten_index(std::int64_t k, int n_nodes, int n_layers);

/// One weighted entry A(from.node, from.layer, to.node, to.layer).
struct TensorEntry {
    TensorIndex from;
    TensorIndex to;
    double weight = 1.0;
};

enum class DuplicatePolicy { Sum, Reject };

/// Sparse square tensor of shape N x L x N x L, held through its NL x NL
/// flattening. Immutable once built.
class AdjacencyTensor {
public:
    /// The zero tensor.
    AdjacencyTensor(int n_nodes, int n_layers);

    /// Zero weights are dropped. Duplicates are summed or rejected.
    static AdjacencyTensor from_entries(int n_nodes, int n_layers, std::span<const TensorEntry> entries,
                                        DuplicatePolicy policy = DuplicatePolicy::Sum);

    /// Inverse flattening. `matrix` must be NL x NL; explicit zeros are pruned.
    static AdjacencyTensor from_matrix(int n_nodes, int n_layers, SparseMatrix matrix);

    static AdjacencyTensor identity(int n_nodes, int n_layers);

    int n_nodes() const noexcept { return n_nodes_; }
    int n_layers() const noexcept { return n_layers_; }
    /// NL, the side of the flattening.
    Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(n_nodes_) * n_layers_; }
    Eigen::Index nnz() const noexcept { return matrix_.nonZeros(); }
    bool is_symmetric() const noexcept { return symmetric_; }
    bool is_zero() const noexcept { return matrix_.nonZeros() == 0; }

    double entry(TensorIndex from, TensorIndex to) const;

    /// The flattening mat(A).
    const SparseMatrix& matrix() const noexcept { return matrix_; }

    /// Stored entries in flattened row-major order.
    std::vector<TensorEntry> entries() const;

    friend bool operator==(const AdjacencyTensor& a, const AdjacencyTensor& b);

private:
    AdjacencyTensor(int n_nodes, int n_layers, SparseMatrix matrix);

    int n_nodes_;
    int n_layers_;
    SparseMatrix matrix_;
    bool symmetric_ = true;
};

/// Dense N x L block, e.g. E (all ones) or a selector E_{i,l}. Its
/// flattening is the column-major vectorization of the N x L array.
class BlockVector {
public:
    BlockVector(int n_nodes, int n_layers);
    /// Throws DomainError on non-finite entries.
    explicit BlockVector(DenseMatrix data);

    static BlockVector zeros(int n_nodes, int n_layers) { return {n_nodes, n_layers}; }
    static BlockVector ones(int n_nodes, int n_layers);
    static BlockVector unit(int n_nodes, int n_layers, TensorIndex at);
    static BlockVector from_flat(int n_nodes, int n_layers, const DenseVector& flat);

    int n_nodes() const noexcept { return static_cast<int>(data_.rows()); }
    int n_layers() const noexcept { return static_cast<int>(data_.cols()); }

    double operator()(TensorIndex idx) const;
    double& operator()(TensorIndex idx);

    const DenseMatrix& data() const noexcept { return data_; }
    Eigen::Map<const DenseVector> flat() const { return {data_.data(), data_.size()}; }
    Eigen::Map<DenseVector> flat() { return {data_.data(), data_.size()}; }

    BlockVector& operator+=(const BlockVector& other);
    BlockVector& operator-=(const BlockVector& other);
    BlockVector& operator*=(double s);
    friend BlockVector operator*(double s, BlockVector v) { return v *= s; }

private:
    DenseMatrix data_;
};

/// Third-order N x L x R tensor: R frontal slices, each an N x L block.
/// Stored as an NL x R matrix whose columns are the flattened slices.
class BlockTensor {
public:
    BlockTensor(int n_nodes, int n_layers, DenseMatrix columns);
    static BlockTensor from_slices(std::span<const BlockVector> slices);
    /// Slices E_{i,l} for each listed node-layer pair.
    static BlockTensor selectors(int n_nodes, int n_layers, std::span<const TensorIndex> at);

    int n_nodes() const noexcept { return n_nodes_; }
    int n_layers() const noexcept { return n_layers_; }
    Eigen::Index n_slices() const noexcept { return columns_.cols(); }

    BlockVector slice(Eigen::Index r) const;
    const DenseMatrix& columns() const noexcept { return columns_; }

private:
    int n_nodes_;
    int n_layers_;
    DenseMatrix columns_;
};

/// A *_2 B. The flattening of the result is mat(A) * mat(B).
AdjacencyTensor einstein(const AdjacencyTensor& a, const AdjacencyTensor& b);
/// A *_2 V.
BlockVector einstein(const AdjacencyTensor& a, const BlockVector& v);
/// A *_2 V applied slice by slice.
BlockTensor einstein(const AdjacencyTensor& a, const BlockTensor& v);

/// mat(A) * x with a fixed per-row reduction order; rows are split across
/// thread_count() workers, so results do not depend on the thread count.
DenseVector apply_flat(const SparseMatrix& a, const DenseVector& x);
DenseMatrix apply_flat(const SparseMatrix& a, const DenseMatrix& x);

/// Trace inner product sum_{i,l} X(i,l) Y(i,l).
double inner_product(const BlockVector& x, const BlockVector& y);
double inner_product(const AdjacencyTensor& a, const AdjacencyTensor& b);
/// X *_2 T for a block X and an already-applied block T, e.g. E_{i,l} *_2 (f(A) *_2 E).
inline double bilinear_form(const BlockVector& x, const BlockVector& applied) { return inner_product(x, applied); }

double frobenius_norm(const BlockVector& x);
double frobenius_norm(const AdjacencyTensor& a);
double trace(const AdjacencyTensor& a);
AdjacencyTensor transpose(const AdjacencyTensor& a);
AdjacencyTensor tensor_power(const AdjacencyTensor& a, int p);
inline AdjacencyTensor identity_tensor(int n_nodes, int n_layers) { return AdjacencyTensor::identity(n_nodes, n_layers); }

/// Worker count for row-parallel contractions. Initialised from the
/// MLCENT_THREADS environment variable, default 1.
int thread_count();
void set_thread_count(int n);

} // namespace mlcent
