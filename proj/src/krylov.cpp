#include "mlcent/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mlcent/error.hpp"

namespace mlcent {

namespace {

// Orthogonalizes x against the first `k` columns of q with two classical
// Gram-Schmidt passes, plus a third when the second pass still cancels more
// than half the norm. Returns the accumulated projection coefficients.
DenseVector orthogonalize(const DenseMatrix& q, Eigen::Index k, DenseVector& x) {
    DenseVector coeffs = DenseVector::Zero(k);
    if (k == 0) return coeffs;
    const auto basis = q.leftCols(k);
    for (int pass = 0; pass < 3; ++pass) {
        const double before = x.norm();
        const DenseVector c = basis.transpose() * x;
        x.noalias() -= basis * c;
        coeffs += c;
        if (pass >= 1 && x.norm() > M_SQRT1_2 * before) break;
    }
    return coeffs;
}

double breakdown_threshold(const AdjacencyTensor& a) {
    return kBreakdownTolerance * std::max(1.0, frobenius_norm(a));
}

} // namespace

// ---------------------------------------------------------------------------
// Global Arnoldi

DenseMatrix GlobalKrylovDecomposition::basis_matrix() const {
    if (basis.empty()) return {};
    DenseMatrix out(basis.front().flat().size(), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = basis[j].flat();
    return out;
}

GlobalKrylovDecomposition global_arnoldi(const AdjacencyTensor& a, const BlockVector& v, int m) {
    if (a.n_nodes() != v.n_nodes() || a.n_layers() != v.n_layers())
        throw DomainError("global Arnoldi: block shape does not match tensor");
    const Eigen::Index n = a.dimension();
    if (m < 1 || m > n)
        throw DomainError("global Arnoldi: need 1 <= m <= NL = " + std::to_string(n) + ", got " + std::to_string(m));
    const double v_norm = frobenius_norm(v);
    if (v_norm == 0.0) throw DomainError("global Arnoldi: zero initial block");

    const double threshold = breakdown_threshold(a);
    DenseMatrix q(n, m + 1);
    DenseMatrix h = DenseMatrix::Zero(m + 1, m);
    q.col(0) = v.flat() / v_norm;

    GlobalKrylovDecomposition out;
    out.v_norm = v_norm;
    int completed = m;
    for (int j = 0; j < m; ++j) {
        DenseVector w = apply_flat(a.matrix(), DenseVector(q.col(j)));
        h.col(j).head(j + 1) = orthogonalize(q, j + 1, w);
        const double subdiagonal = w.norm();
        if (subdiagonal <= threshold) {
            out.breakdown_at = j + 1;
            completed = j + 1;
            break;
        }
        h(j + 1, j) = subdiagonal;
        q.col(j + 1) = w / subdiagonal;
    }

    out.hessenberg = h.topLeftCorner(completed + 1, completed);
    const int basis_size = out.breakdown_at ? completed : completed + 1;
    out.basis.reserve(static_cast<std::size_t>(basis_size));
    for (int j = 0; j < basis_size; ++j)
        out.basis.push_back(BlockVector::from_flat(a.n_nodes(), a.n_layers(), q.col(j)));
    return out;
}

BlockVector function_times_block(const GlobalKrylovDecomposition& decomposition, const FunctionSpec& spec) {
    const int k = decomposition.steps();
    const DenseMatrix f = apply_spec(decomposition.square_hessenberg(), spec);
    const DenseVector y = f.col(0) * decomposition.v_norm;
    BlockVector result(decomposition.basis.front().n_nodes(), decomposition.basis.front().n_layers());
    for (int j = 0; j < k; ++j) result.flat() += y[j] * decomposition.basis[static_cast<std::size_t>(j)].flat();
    return result;
}

KrylovApproximation approx_function_times_block(const AdjacencyTensor& a, const BlockVector& v, int m,
                                                const FunctionSpec& spec) {
    const auto decomposition = global_arnoldi(a, v, m);
    return {function_times_block(decomposition, spec), decomposition.steps(), decomposition.breakdown_at.has_value()};
}

// ---------------------------------------------------------------------------
// Block QR and block Arnoldi

BlockQR block_qr(const DenseMatrix& w, double drop_tolerance) {
    const Eigen::Index n = w.rows();
    const Eigen::Index cols = w.cols();
    if (drop_tolerance < 0.0) {
        const double largest = cols > 0 ? w.colwise().norm().maxCoeff() : 0.0;
        drop_tolerance = 1e-12 * largest;
    }
    BlockQR out;
    DenseMatrix q(n, cols);
    DenseMatrix r = DenseMatrix::Zero(cols, cols);
    Eigen::Index rank = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        DenseVector x = w.col(c);
        r.col(c).head(rank) = orthogonalize(q, rank, x);
        const double norm = x.norm();
        if (norm <= drop_tolerance || rank == n) {
            out.dependent_columns.push_back(static_cast<int>(c));
            continue;
        }
        q.col(rank) = x / norm;
        r(rank, c) = norm;
        ++rank;
    }
    out.q = q.leftCols(rank);
    out.r_factor = r.topRows(rank);
    out.rank = static_cast<int>(rank);
    return out;
}

Eigen::Index BlockKrylovDecomposition::block_offset(int j) const {
    if (j < 1 || j > static_cast<int>(block_widths.size())) throw DomainError("block index out of range");
    return std::accumulate(block_widths.begin(), block_widths.begin() + (j - 1), Eigen::Index{0});
}

BlockTensor BlockKrylovDecomposition::block(int j) const {
    const Eigen::Index offset = block_offset(j);
    return {n_nodes, n_layers, basis.middleCols(offset, block_widths[static_cast<std::size_t>(j - 1)])};
}

BlockKrylovDecomposition block_arnoldi(const AdjacencyTensor& a, const BlockTensor& v, int m) {
    if (a.n_nodes() != v.n_nodes() || a.n_layers() != v.n_layers())
        throw DomainError("block Arnoldi: block shape does not match tensor");
    if (m < 1) throw DomainError("block Arnoldi: need m >= 1, got " + std::to_string(m));
    const Eigen::Index n = a.dimension();
    const auto r_in = static_cast<int>(v.n_slices());

    BlockQR first = block_qr(v.columns());
    if (first.rank == 0) throw DomainError("block Arnoldi: zero initial tensor");

    BlockKrylovDecomposition out;
    out.n_nodes = a.n_nodes();
    out.n_layers = a.n_layers();
    out.block_size = r_in;
    out.chi0 = first.r_factor;
    if (first.rank < r_in) out.deflations.push_back({0, r_in, first.rank});

    const Eigen::Index capacity = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(first.rank) * (m + 1));
    DenseMatrix q(n, capacity);
    DenseMatrix h = DenseMatrix::Zero(capacity, capacity);
    q.leftCols(first.rank) = first.q;
    out.block_widths.push_back(first.rank);
    Eigen::Index total = first.rank;  // columns stored in q
    Eigen::Index offset = 0;          // start of the current block V_j

    const double threshold = breakdown_threshold(a);
    for (int j = 1; j <= m; ++j) {
        const int width = out.block_widths.back();
        const DenseMatrix w = apply_flat(a.matrix(), DenseMatrix(q.middleCols(offset, width)));
        const Eigen::Index previous = total;
        int accepted = 0;
        for (int c = 0; c < width; ++c) {
            DenseVector x = w.col(c);
            // Projections onto V_1..V_j fill H_{i,j}; onto the new columns, H_{j+1,j}.
            const DenseVector coeffs = orthogonalize(q, total, x);
            h.col(offset + c).head(total) = coeffs;
            const double norm = x.norm();
            if (norm <= threshold || total == capacity) continue;
            q.col(total) = x / norm;
            h(total, offset + c) = norm;
            ++total;
            ++accepted;
        }
        if (accepted < width) {
            out.deflations.push_back({j, width, accepted});
            if (!out.breakdown_at) out.breakdown_at = j;
        }
        out.block_widths.push_back(accepted);
        offset = previous;
        if (accepted == 0) break;
    }

    const Eigen::Index leading = total - out.block_widths.back();
    out.basis = q.leftCols(total);
    out.block_hessenberg = h.topLeftCorner(total, leading);
    return out;
}

DenseMatrix block_function_times_start(const BlockKrylovDecomposition& decomposition, const FunctionSpec& spec) {
    const DenseMatrix f = apply_spec(decomposition.square_hessenberg(), spec);
    const Eigen::Index first_width = decomposition.block_widths.front();
    return decomposition.leading_basis() * (f.leftCols(first_width) * decomposition.chi0);
}

BlockApproximation block_approx_function(const AdjacencyTensor& a, const BlockTensor& v, int m,
                                         const FunctionSpec& spec, Augmentation augment) {
    const Eigen::Index r = v.n_slices();
    DenseMatrix start = v.columns();
    if (augment != Augmentation::None) {
        start.conservativeResize(Eigen::NoChange, r + 1);
        if (augment == Augmentation::Ones) {
            start.col(r).setOnes();
        } else {
            std::mt19937_64 rng(kAugmentationSeed);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (Eigen::Index i = 0; i < start.rows(); ++i) start(i, r) = unif(rng);
        }
    }
    const auto decomposition = block_arnoldi(a, BlockTensor(v.n_nodes(), v.n_layers(), std::move(start)), m);
    DenseMatrix full = block_function_times_start(decomposition, spec);
    return {BlockTensor(v.n_nodes(), v.n_layers(), full.leftCols(r)), decomposition.steps(),
            decomposition.breakdown_at.has_value(), decomposition.deflations};
}

} // namespace mlcent
