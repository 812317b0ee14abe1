#include "mlcent/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <utility>

#include "mlcent/error.hpp"

namespace mlcent {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_positive_shape(int n_nodes, int n_layers) {
    if (n_nodes < 1 || n_layers < 1)
        throw DomainError("tensor shape must be positive, got N=" + std::to_string(n_nodes) +
                          ", L=" + std::to_string(n_layers));
}

void require_same_shape(int n1, int l1, int n2, int l2, const char* op) {
    if (n1 != n2 || l1 != l2)
        throw DomainError(std::string(op) + ": shape mismatch (" + std::to_string(n1) + "x" +
                          std::to_string(l1) + " vs " + std::to_string(n2) + "x" + std::to_string(l2) + ")");
}

bool exactly_symmetric(const SparseMatrix& m) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            if (m.coeff(it.col(), it.row()) != it.value()) return false;
    return true;
}

int threads_from_env() {
    const char* env = std::getenv("MLCENT_THREADS");
    if (env == nullptr) return 1;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> n{threads_from_env()};
    return n;
}

// Below this many stored entries the contraction runs on the calling thread.
constexpr Eigen::Index kParallelThreshold = 1 << 15;

template <class RowKernel>
void for_each_row(Eigen::Index rows, Eigen::Index nnz, RowKernel&& kernel) {
    const int workers = std::min<Eigen::Index>(thread_count(), std::max<Eigen::Index>(rows, 1));
    if (workers <= 1 || nnz < kParallelThreshold) {
        kernel(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const Eigen::Index chunk = (rows + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        Eigen::Index begin = w * chunk;
        Eigen::Index end = std::min(rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&kernel, begin, end] { kernel(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace

std::int64_t flatten_index(TensorIndex idx, int n_nodes, int n_layers) {
    require_positive_shape(n_nodes, n_layers);
    if (idx.node < 1 || idx.node > n_nodes || idx.layer < 1 || idx.layer > n_layers)
        throw DomainError("index (node=" + std::to_string(idx.node) + ", layer=" + std::to_string(idx.layer) +
                          ") outside N=" + std::to_string(n_nodes) + ", L=" + std::to_string(n_layers));
    return idx.node + static_cast<std::int64_t>(idx.layer - 1) * n_nodes;
}

TensorIndex unflatten_index(std::int64_t k, int n_nodes, int n_layers) {
    require_positive_shape(n_nodes, n_layers);
    const std::int64_t size = static_cast<std::int64_t>(n_nodes) * n_layers;
    if (k < 1 || k > size)
        throw DomainError("flattened index " + std::to_string(k) + " outside [1, " + std::to_string(size) + "]");
    const std::int64_t zero_based = k - 1;
    return {static_cast<int>(zero_based % n_nodes) + 1, static_cast<int>(zero_based / n_nodes) + 1};
}

// ---------------------------------------------------------------------------
// AdjacencyTensor

AdjacencyTensor::AdjacencyTensor(int n_nodes, int n_layers)
    : n_nodes_(n_nodes), n_layers_(n_layers) {
    require_positive_shape(n_nodes, n_layers);
    matrix_.resize(dimension(), dimension());
}

AdjacencyTensor::AdjacencyTensor(int n_nodes, int n_layers, SparseMatrix matrix)
    : n_nodes_(n_nodes), n_layers_(n_layers), matrix_(std::move(matrix)) {
    require_positive_shape(n_nodes, n_layers);
    if (matrix_.rows() != dimension() || matrix_.cols() != dimension())
        throw DomainError("flattened matrix must be " + std::to_string(dimension()) + "x" +
                          std::to_string(dimension()));
    matrix_.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
    matrix_.makeCompressed();
    for (Eigen::Index k = 0; k < matrix_.nonZeros(); ++k)
        if (!std::isfinite(matrix_.valuePtr()[k])) throw DomainError("tensor entries must be finite");
    symmetric_ = exactly_symmetric(matrix_);
}

AdjacencyTensor AdjacencyTensor::from_entries(int n_nodes, int n_layers, std::span<const TensorEntry> entries,
                                              DuplicatePolicy policy) {
    require_positive_shape(n_nodes, n_layers);
    std::map<std::pair<std::int64_t, std::int64_t>, double> acc;
    for (const auto& e : entries) {
        if (!std::isfinite(e.weight)) throw DomainError("tensor entries must be finite");
        auto key = std::pair{flatten_index(e.from, n_nodes, n_layers) - 1, flatten_index(e.to, n_nodes, n_layers) - 1};
        if (e.weight == 0.0) continue;
        auto [it, inserted] = acc.emplace(key, e.weight);
        if (!inserted) {
            if (policy == DuplicatePolicy::Reject)
                throw DomainError("duplicate entry (" + std::to_string(e.from.node) + "," +
                                  std::to_string(e.from.layer) + ") -> (" + std::to_string(e.to.node) + "," +
                                  std::to_string(e.to.layer) + ")");
            it->second += e.weight;
        }
    }
    std::vector<Triplet> triplets;
    triplets.reserve(acc.size());
    for (const auto& [key, w] : acc) triplets.emplace_back(key.first, key.second, w);
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * n_layers;
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return {n_nodes, n_layers, std::move(m)};
}

AdjacencyTensor AdjacencyTensor::from_matrix(int n_nodes, int n_layers, SparseMatrix matrix) {
    return {n_nodes, n_layers, std::move(matrix)};
}

AdjacencyTensor AdjacencyTensor::identity(int n_nodes, int n_layers) {
    require_positive_shape(n_nodes, n_layers);
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * n_layers;
    SparseMatrix m(n, n);
    m.setIdentity();
    return {n_nodes, n_layers, std::move(m)};
}

double AdjacencyTensor::entry(TensorIndex from, TensorIndex to) const {
    return matrix_.coeff(flatten_index(from, n_nodes_, n_layers_) - 1, flatten_index(to, n_nodes_, n_layers_) - 1);
}

std::vector<TensorEntry> AdjacencyTensor::entries() const {
    std::vector<TensorEntry> out;
    out.reserve(static_cast<std::size_t>(matrix_.nonZeros()));
    for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it)
            out.push_back({unflatten_index(it.row() + 1, n_nodes_, n_layers_),
                           unflatten_index(it.col() + 1, n_nodes_, n_layers_), it.value()});
    return out;
}

bool operator==(const AdjacencyTensor& a, const AdjacencyTensor& b) {
    if (a.n_nodes_ != b.n_nodes_ || a.n_layers_ != b.n_layers_ || a.nnz() != b.nnz()) return false;
    const auto& x = a.matrix_;
    const auto& y = b.matrix_;
    return std::equal(x.outerIndexPtr(), x.outerIndexPtr() + x.outerSize() + 1, y.outerIndexPtr()) &&
           std::equal(x.innerIndexPtr(), x.innerIndexPtr() + x.nonZeros(), y.innerIndexPtr()) &&
           std::equal(x.valuePtr(), x.valuePtr() + x.nonZeros(), y.valuePtr());
}

// ---------------------------------------------------------------------------
// BlockVector / BlockTensor

BlockVector::BlockVector(int n_nodes, int n_layers) {
    require_positive_shape(n_nodes, n_layers);
    data_ = DenseMatrix::Zero(n_nodes, n_layers);
}

BlockVector::BlockVector(DenseMatrix data) : data_(std::move(data)) {
    require_positive_shape(static_cast<int>(data_.rows()), static_cast<int>(data_.cols()));
    if (!data_.allFinite()) throw DomainError("block entries must be finite");
}

BlockVector BlockVector::ones(int n_nodes, int n_layers) {
    require_positive_shape(n_nodes, n_layers);
    return BlockVector(DenseMatrix::Ones(n_nodes, n_layers));
}

BlockVector BlockVector::unit(int n_nodes, int n_layers, TensorIndex at) {
    BlockVector v(n_nodes, n_layers);
    v(at) = 1.0;
    return v;
}

BlockVector BlockVector::from_flat(int n_nodes, int n_layers, const DenseVector& flat) {
    require_positive_shape(n_nodes, n_layers);
    if (flat.size() != static_cast<Eigen::Index>(n_nodes) * n_layers)
        throw DomainError("flat vector length " + std::to_string(flat.size()) + " does not match N*L");
    return BlockVector(Eigen::Map<const DenseMatrix>(flat.data(), n_nodes, n_layers));
}

double BlockVector::operator()(TensorIndex idx) const {
    flatten_index(idx, n_nodes(), n_layers());
    return data_(idx.node - 1, idx.layer - 1);
}

double& BlockVector::operator()(TensorIndex idx) {
    flatten_index(idx, n_nodes(), n_layers());
    return data_(idx.node - 1, idx.layer - 1);
}

BlockVector& BlockVector::operator+=(const BlockVector& other) {
    require_same_shape(n_nodes(), n_layers(), other.n_nodes(), other.n_layers(), "block addition");
    data_ += other.data_;
    return *this;
}

BlockVector& BlockVector::operator-=(const BlockVector& other) {
    require_same_shape(n_nodes(), n_layers(), other.n_nodes(), other.n_layers(), "block subtraction");
    data_ -= other.data_;
    return *this;
}

BlockVector& BlockVector::operator*=(double s) {
    data_ *= s;
    return *this;
}

BlockTensor::BlockTensor(int n_nodes, int n_layers, DenseMatrix columns)
    : n_nodes_(n_nodes), n_layers_(n_layers), columns_(std::move(columns)) {
    require_positive_shape(n_nodes, n_layers);
    if (columns_.rows() != static_cast<Eigen::Index>(n_nodes) * n_layers)
        throw DomainError("block tensor columns must have N*L rows");
    if (!columns_.allFinite()) throw DomainError("block tensor entries must be finite");
}

BlockTensor BlockTensor::from_slices(std::span<const BlockVector> slices) {
    if (slices.empty()) throw DomainError("block tensor needs at least one slice");
    const int n = slices.front().n_nodes();
    const int l = slices.front().n_layers();
    DenseMatrix cols(static_cast<Eigen::Index>(n) * l, static_cast<Eigen::Index>(slices.size()));
    for (std::size_t r = 0; r < slices.size(); ++r) {
        require_same_shape(n, l, slices[r].n_nodes(), slices[r].n_layers(), "block tensor slices");
        cols.col(static_cast<Eigen::Index>(r)) = slices[r].flat();
    }
    return {n, l, std::move(cols)};
}

BlockTensor BlockTensor::selectors(int n_nodes, int n_layers, std::span<const TensorIndex> at) {
    if (at.empty()) throw DomainError("block tensor needs at least one slice");
    DenseMatrix cols = DenseMatrix::Zero(static_cast<Eigen::Index>(n_nodes) * n_layers,
                                         static_cast<Eigen::Index>(at.size()));
    for (std::size_t r = 0; r < at.size(); ++r)
        cols(flatten_index(at[r], n_nodes, n_layers) - 1, static_cast<Eigen::Index>(r)) = 1.0;
    return {n_nodes, n_layers, std::move(cols)};
}

BlockVector BlockTensor::slice(Eigen::Index r) const {
    if (r < 0 || r >= n_slices()) throw DomainError("slice index out of range");
    return BlockVector::from_flat(n_nodes_, n_layers_, columns_.col(r));
}

// ---------------------------------------------------------------------------
// Contractions

DenseVector apply_flat(const SparseMatrix& a, const DenseVector& x) {
    if (a.cols() != x.size()) throw DomainError("contraction: dimension mismatch");
    DenseVector y(a.rows());
    for_each_row(a.rows(), a.nonZeros(), [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index r = begin; r < end; ++r) {
            double s = 0.0;
            for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += it.value() * x[it.col()];
            y[r] = s;
        }
    });
    return y;
}

DenseMatrix apply_flat(const SparseMatrix& a, const DenseMatrix& x) {
    if (a.cols() != x.rows()) throw DomainError("contraction: dimension mismatch");
    DenseMatrix y(a.rows(), x.cols());
    for_each_row(a.rows(), a.nonZeros() * x.cols(), [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            for (Eigen::Index r = begin; r < end; ++r) {
                double s = 0.0;
                for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += it.value() * x(it.col(), c);
                y(r, c) = s;
            }
    });
    return y;
}

AdjacencyTensor einstein(const AdjacencyTensor& a, const AdjacencyTensor& b) {
    require_same_shape(a.n_nodes(), a.n_layers(), b.n_nodes(), b.n_layers(), "einstein product");
    SparseMatrix product = (a.matrix() * b.matrix()).pruned();
    return AdjacencyTensor::from_matrix(a.n_nodes(), a.n_layers(), std::move(product));
}

BlockVector einstein(const AdjacencyTensor& a, const BlockVector& v) {
    require_same_shape(a.n_nodes(), a.n_layers(), v.n_nodes(), v.n_layers(), "einstein product");
    return BlockVector::from_flat(a.n_nodes(), a.n_layers(), apply_flat(a.matrix(), DenseVector(v.flat())));
}

BlockTensor einstein(const AdjacencyTensor& a, const BlockTensor& v) {
    require_same_shape(a.n_nodes(), a.n_layers(), v.n_nodes(), v.n_layers(), "einstein product");
    return {a.n_nodes(), a.n_layers(), apply_flat(a.matrix(), v.columns())};
}

double inner_product(const BlockVector& x, const BlockVector& y) {
    require_same_shape(x.n_nodes(), x.n_layers(), y.n_nodes(), y.n_layers(), "inner product");
    return x.flat().dot(y.flat());
}

double inner_product(const AdjacencyTensor& a, const AdjacencyTensor& b) {
    require_same_shape(a.n_nodes(), a.n_layers(), b.n_nodes(), b.n_layers(), "inner product");
    return a.matrix().cwiseProduct(b.matrix()).sum();
}

double frobenius_norm(const BlockVector& x) { return x.data().norm(); }

double frobenius_norm(const AdjacencyTensor& a) { return a.matrix().norm(); }

double trace(const AdjacencyTensor& a) {
    double t = 0.0;
    for (Eigen::Index r = 0; r < a.matrix().outerSize(); ++r) t += a.matrix().coeff(r, r);
    return t;
}

AdjacencyTensor transpose(const AdjacencyTensor& a) {
    SparseMatrix t = a.matrix().transpose();
    return AdjacencyTensor::from_matrix(a.n_nodes(), a.n_layers(), std::move(t));
}

AdjacencyTensor tensor_power(const AdjacencyTensor& a, int p) {
    if (p < 0) throw DomainError("tensor power requires p >= 0, got " + std::to_string(p));
    AdjacencyTensor result = AdjacencyTensor::identity(a.n_nodes(), a.n_layers());
    for (int k = 0; k < p; ++k) result = einstein(a, result);
    return result;
}

int thread_count() { return thread_setting().load(); }

void set_thread_count(int n) {
    if (n < 1) throw DomainError("thread count must be positive");
    thread_setting().store(n);
}

} // namespace mlcent
