#pragma once

#include <span>
#include <vector>

#include "mlcent/tensor.hpp"

namespace mlcent {

enum class FunctionKind {
    Exp,         ///< exp(beta H)
    Exp0,        ///< exp(beta H) - I
    Resolvent,   ///< (I - alpha H)^{-1}
    Resolvent0,  ///< (I - alpha H)^{-1} - I
    PowerSeries  ///< sum_{p>=1} c_p H^p over a finite coefficient list
};

/// A matrix (or tensor) function. Build through the named constructors so
/// only the parameters relevant to the kind are set.
struct FunctionSpec {
    FunctionKind kind = FunctionKind::Exp;
    double beta = 0.0;
    double alpha = 0.0;
    /// c_1, c_2, ... for PowerSeries; c_p multiplies H^p.
    std::vector<double> coefficients;

    static FunctionSpec exp(double beta);
    static FunctionSpec exp0(double beta);
    static FunctionSpec resolvent(double alpha);
    static FunctionSpec resolvent0(double alpha);
    static FunctionSpec power_series(std::vector<double> coefficients);

    bool is_resolvent() const noexcept {
        return kind == FunctionKind::Resolvent || kind == FunctionKind::Resolvent0;
    }
    /// Throws DomainError when parameters are out of range for the kind.
    void validate() const;
};

struct SpectralEstimate {
    double lambda_max = 0.0;
    /// ||mat(A) x - lambda x||_2 / ||x||_2 for the returned eigenvector.
    double residual = 0.0;
    int iterations = 0;
    /// True when the one-step iteration oscillated and the +/- lambda pair was
    /// separated from the two-step iterate.
    bool sign_split = false;
    DenseVector eigenvector;
};

/// exp(beta H) by scaling and squaring with the [13/13] Pade approximant.
DenseMatrix dense_expm(const DenseMatrix& h, double beta = 1.0);

/// (I - alpha H)^{-1} through an LU factorization. For an entrywise
/// nonnegative H the series condition alpha * rho(H) < 1 is verified first
/// unless `verify_convergence` is false.
DenseMatrix dense_resolvent(const DenseMatrix& h, double alpha, bool verify_convergence = true);

DenseMatrix apply_spec(const DenseMatrix& h, const FunctionSpec& spec);

/// Smallest k with max_{l>k}|c_l| / max_{1<=j<=k}|c_j| <= delta, where
/// coefficients[0] is c_1.
int effective_diameter(std::span<const double> coefficients, double delta);

/// c_p = beta^p / p! for p = 1..count.
std::vector<double> exponential_coefficients(double beta, int count);
/// c_p = alpha^p for p = 1..count.
std::vector<double> resolvent_coefficients(double alpha, int count);

/// Dominant-magnitude eigenvalue of mat(A) by power iteration from the
/// normalized all-ones vector.
SpectralEstimate estimate_lambda_max(const AdjacencyTensor& a, double tol = 1e-8, int max_iter = 5000);

} // namespace mlcent
