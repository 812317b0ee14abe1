#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the library's matrix-function or Krylov code.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mlcent/tensor.hpp"

namespace mlcent::testing {

/// Published Example 1 scores, four decimals, indexed [node-1][layer-1].
struct Example1Scores {
    static constexpr std::array<std::array<double, 2>, 5> mtc = {{
        {12.2520, 7.7379}, {9.6537, 17.2450}, {8.9474, 11.7351}, {10.8250, 4.2550}, {10.6175, 10.6175}}};
    static constexpr std::array<std::array<double, 2>, 5> mkc = {{
        {2.1131, 1.7044}, {1.8145, 2.5454}, {1.7645, 1.9484}, {1.8876, 1.3470}, {1.8774, 1.8774}}};
    static constexpr std::array<std::array<double, 2>, 5> msc_exp = {{
        {3.1001, 2.2834}, {2.3582, 4.1313}, {2.3946, 2.4698}, {2.4174, 1.5922}, {2.5001, 2.5001}}};
    static constexpr std::array<std::array<double, 2>, 5> msc_res = {{
        {1.1507, 1.0952}, {1.0987, 1.2165}, {1.1003, 1.1039}, {1.1016, 1.0454}, {1.1051, 1.1051}}};
};

/// Supra-adjacency of the Example 1 network, written out entry by entry.
inline Eigen::MatrixXd example1_matrix() {
    // flat index = node + 5 * (layer - 1), 0-based below
    const std::array<std::pair<int, int>, 11> edges = {{
        {0, 1}, {1, 3}, {2, 4},   // layer 1
        {5, 8}, {6, 7}, {6, 9},   // layer 2
        {0, 5}, {0, 7}, {2, 9}, {3, 6}, {4, 6},
    }};
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(10, 10);
    for (auto [u, v] : edges) a(u, v) = a(v, u) = 1.0;
    return a;
}

/// Truncated Taylor series of exp(beta H).
inline Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& h, double beta, int terms) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(h.rows(), h.cols());
    Eigen::MatrixXd term = sum;
    for (int p = 1; p < terms; ++p) {
        term = term * (beta * h) / static_cast<double>(p);
        sum += term;
    }
    return sum;
}

/// Dominant-magnitude eigenvalue of a symmetric matrix.
inline double symmetric_lambda_max(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const auto& ev = es.eigenvalues();
    return std::abs(ev.minCoeff()) > std::abs(ev.maxCoeff()) ? ev.minCoeff() : ev.maxCoeff();
}

/// sum_{p=1..n} c_p A^p V by repeated sparse products.
inline Eigen::MatrixXd polynomial_times_block(const SparseMatrix& a, const std::vector<double>& c,
                                              const Eigen::MatrixXd& v) {
    Eigen::MatrixXd power = v;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (double cp : c) {
        power = a * power;
        sum += cp * power;
    }
    return sum;
}

struct RandomTensorOptions {
    int max_nodes = 6;
    int max_layers = 3;
    double density = 0.3;
    bool symmetric = false;
    bool unit_weights = false;
};

/// Random sparse tensor; each flattened entry is present with probability `density`.
inline AdjacencyTensor random_tensor(std::mt19937_64& rng, int n, int l, double density, bool symmetric,
                                     bool unit_weights = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> w(0.1, 1.0);
    const int nl = n * l;
    std::vector<TensorEntry> entries;
    for (int r = 1; r <= nl; ++r)
        for (int c = symmetric ? r : 1; c <= nl; ++c) {
            if (u(rng) >= density) continue;
            const double weight = unit_weights ? 1.0 : w(rng);
            const auto from = unflatten_index(r, n, l);
            const auto to = unflatten_index(c, n, l);
            entries.push_back({from, to, weight});
            if (symmetric && r != c) entries.push_back({to, from, weight});
        }
    return AdjacencyTensor::from_entries(n, l, entries);
}

inline Eigen::MatrixXd dense(const AdjacencyTensor& a) { return Eigen::MatrixXd(a.matrix()); }

} // namespace mlcent::testing
