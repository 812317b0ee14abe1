#include "mlcent/matrix_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mlcent/error.hpp"

namespace mlcent {

namespace {

void require_square(const DenseMatrix& h, const char* op) {
    if (h.rows() != h.cols())
        throw DomainError(std::string(op) + ": matrix must be square, got " + std::to_string(h.rows()) + "x" +
                          std::to_string(h.cols()));
    if (!h.allFinite()) throw DomainError(std::string(op) + ": matrix entries must be finite");
}

bool exactly_symmetric(const DenseMatrix& h) {
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        for (Eigen::Index i = j + 1; i < h.rows(); ++i)
            if (h(i, j) != h(j, i)) return false;
    return true;
}

DenseMatrix symmetrized(const DenseMatrix& x) { return 0.5 * (x + x.transpose()); }

double one_norm(const DenseMatrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// Pade coefficients b_0..b_m for the diagonal approximants used by the
// scaling and squaring method, with the 1-norm thresholds theta_m below
// which no scaling is needed (double precision).
constexpr std::array<double, 4> kB3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kB7 = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
constexpr std::array<double, 10> kB9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                        2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 14> kB13 = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                         1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                         670442572800.0,      33522128640.0,       1323241920.0,
                                         40840800.0,          960960.0,            16380.0,
                                         182.0,               1.0};
constexpr std::array<double, 4> kTheta = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                          2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152;

template <std::size_t K>
DenseMatrix pade_low(const DenseMatrix& a, const std::array<double, K>& b) {
    const Eigen::Index n = a.rows();
    const DenseMatrix ident = DenseMatrix::Identity(n, n);
    const DenseMatrix a2 = a * a;
    DenseMatrix power = ident;
    DenseMatrix u_inner = DenseMatrix::Zero(n, n);
    DenseMatrix v = DenseMatrix::Zero(n, n);
    for (std::size_t k = 0; k < K; k += 2) {
        v += b[k] * power;
        u_inner += b[k + 1] * power;
        power = power * a2;
    }
    const DenseMatrix u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

DenseMatrix pade13(const DenseMatrix& a) {
    const auto& b = kB13;
    const Eigen::Index n = a.rows();
    const DenseMatrix ident = DenseMatrix::Identity(n, n);
    const DenseMatrix a2 = a * a;
    const DenseMatrix a4 = a2 * a2;
    const DenseMatrix a6 = a4 * a2;
    const DenseMatrix u =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    const DenseMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

} // namespace

// ---------------------------------------------------------------------------
// FunctionSpec

FunctionSpec FunctionSpec::exp(double beta) {
    FunctionSpec s;
    s.kind = FunctionKind::Exp;
    s.beta = beta;
    s.validate();
    return s;
}

FunctionSpec FunctionSpec::exp0(double beta) {
    FunctionSpec s;
    s.kind = FunctionKind::Exp0;
    s.beta = beta;
    s.validate();
    return s;
}

FunctionSpec FunctionSpec::resolvent(double alpha) {
    FunctionSpec s;
    s.kind = FunctionKind::Resolvent;
    s.alpha = alpha;
    s.validate();
    return s;
}

FunctionSpec FunctionSpec::resolvent0(double alpha) {
    FunctionSpec s;
    s.kind = FunctionKind::Resolvent0;
    s.alpha = alpha;
    s.validate();
    return s;
}

FunctionSpec FunctionSpec::power_series(std::vector<double> coefficients) {
    FunctionSpec s;
    s.kind = FunctionKind::PowerSeries;
    s.coefficients = std::move(coefficients);
    s.validate();
    return s;
}

void FunctionSpec::validate() const {
    switch (kind) {
    case FunctionKind::Exp:
    case FunctionKind::Exp0:
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
        if (alpha != 0.0 || !coefficients.empty()) throw DomainError("exponential spec takes only beta");
        break;
    case FunctionKind::Resolvent:
    case FunctionKind::Resolvent0:
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and > 0");
        if (beta != 0.0 || !coefficients.empty()) throw DomainError("resolvent spec takes only alpha");
        break;
    case FunctionKind::PowerSeries:
        if (coefficients.empty()) throw DomainError("power series needs at least one coefficient");
        for (double c : coefficients)
            if (!std::isfinite(c)) throw DomainError("power series coefficients must be finite");
        if (alpha != 0.0 || beta != 0.0) throw DomainError("power series spec takes only coefficients");
        break;
    }
}

// ---------------------------------------------------------------------------
// Dense kernels

DenseMatrix dense_expm(const DenseMatrix& h, double beta) {
    require_square(h, "expm");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("expm: beta must be finite and >= 0");
    const Eigen::Index n = h.rows();
    if (n == 0) return DenseMatrix(0, 0);
    const DenseMatrix a = beta * h;
    const double norm = one_norm(a);
    if (!std::isfinite(norm)) throw NumericError("expm: scaled matrix norm is not finite");

    DenseMatrix result;
    bool done = false;
    const std::array<DenseMatrix (*)(const DenseMatrix&), 4> low = {
        [](const DenseMatrix& x) { return pade_low(x, kB3); }, [](const DenseMatrix& x) { return pade_low(x, kB5); },
        [](const DenseMatrix& x) { return pade_low(x, kB7); }, [](const DenseMatrix& x) { return pade_low(x, kB9); }};
    for (std::size_t k = 0; k < low.size() && !done; ++k) {
        if (norm <= kTheta[k]) {
            result = low[k](a);
            done = true;
        }
    }
    if (!done) {
        int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
        if (s > 1023) throw NumericError("expm: matrix norm too large to exponentiate");
        result = pade13(std::ldexp(1.0, -s) * a);
        for (int k = 0; k < s; ++k) result = result * result;
    }
    if (!result.allFinite()) throw NumericError("expm: result overflowed");
    if (exactly_symmetric(h)) result = symmetrized(result);
    return result;
}

DenseMatrix dense_resolvent(const DenseMatrix& h, double alpha, bool verify_convergence) {
    require_square(h, "resolvent");
    if (!std::isfinite(alpha)) throw DomainError("resolvent: alpha must be finite");
    const Eigen::Index n = h.rows();
    const DenseMatrix ident = DenseMatrix::Identity(n, n);
    if (n == 0) return ident;

    if (verify_convergence && alpha > 0.0 && (h.array() >= 0.0).all() && !h.isZero(0.0)) {
        // The series sum alpha^p H^p converges only below the Perron root.
        const double rho = h.eigenvalues().cwiseAbs().maxCoeff();
        if (alpha * rho >= 1.0)
            throw ConditioningError("resolvent: alpha * spectral radius = " + std::to_string(alpha * rho) +
                                        " >= 1, the series diverges",
                                    alpha * rho);
    }

    const DenseMatrix shifted = ident - alpha * h;
    Eigen::PartialPivLU<DenseMatrix> lu(shifted);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) throw ConditioningError("resolvent: I - alpha H is numerically singular", 1.0 / rcond);
    DenseMatrix result = lu.solve(ident);
    const double residual = (shifted * result - ident).norm();
    if (!result.allFinite() || residual > 1e-10 * std::max(1.0, result.norm()))
        throw ConditioningError("resolvent: solve residual " + std::to_string(residual) + " too large", 1.0 / rcond);
    if (exactly_symmetric(h)) result = symmetrized(result);
    return result;
}

DenseMatrix apply_spec(const DenseMatrix& h, const FunctionSpec& spec) {
    spec.validate();
    require_square(h, "apply_spec");
    const Eigen::Index n = h.rows();
    const DenseMatrix ident = DenseMatrix::Identity(n, n);
    switch (spec.kind) {
    case FunctionKind::Exp:
        return dense_expm(h, spec.beta);
    case FunctionKind::Exp0:
        return dense_expm(h, spec.beta) - ident;
    case FunctionKind::Resolvent:
        return dense_resolvent(h, spec.alpha);
    case FunctionKind::Resolvent0:
        return dense_resolvent(h, spec.alpha) - ident;
    case FunctionKind::PowerSeries: {
        const auto& c = spec.coefficients;
        DenseMatrix acc = c.back() * ident;
        for (std::size_t p = c.size() - 1; p-- > 0;) acc = h * acc + c[p] * ident;
        DenseMatrix result = h * acc;
        if (exactly_symmetric(h)) result = symmetrized(result);
        return result;
    }
    }
    throw DomainError("unknown function kind");
}

int effective_diameter(std::span<const double> coefficients, double delta) {
    if (coefficients.empty()) throw DomainError("effective diameter needs a nonempty coefficient sequence");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("effective diameter needs 0 < delta < 1");
    const std::size_t n = coefficients.size();
    // tail[k] = max_{l > k} |c_l| with 1-based l; tail[n] = 0.
    std::vector<double> tail(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) tail[k] = std::max(tail[k + 1], std::abs(coefficients[k]));
    if (tail[0] == 0.0) throw DomainError("effective diameter undefined: all coefficients are zero");
    double head = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        head = std::max(head, std::abs(coefficients[k - 1]));
        if (head > 0.0 && tail[k] <= delta * head) return static_cast<int>(k);
    }
    return static_cast<int>(n);
}

std::vector<double> exponential_coefficients(double beta, int count) {
    if (count < 0) throw DomainError("coefficient count must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(count));
    double term = 1.0;
    for (int p = 1; p <= count; ++p) {
        term *= beta / p;
        c[static_cast<std::size_t>(p - 1)] = term;
    }
    return c;
}

std::vector<double> resolvent_coefficients(double alpha, int count) {
    if (count < 0) throw DomainError("coefficient count must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(count));
    double term = 1.0;
    for (int p = 1; p <= count; ++p) {
        term *= alpha;
        c[static_cast<std::size_t>(p - 1)] = term;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Power iteration

namespace {

struct PowerState {
    SpectralEstimate best;
    bool converged = false;
    bool null_start = false;
    int used = 0;
};

// One power-iteration run. Every `kCheckEvery` steps the two-step residual is
// inspected to catch a dominant +/- lambda pair, where the one-step iterate
// oscillates between two vectors instead of converging.
PowerState power_run(const SparseMatrix& m, DenseVector x, double tol, int budget, int iteration_offset) {
    constexpr int kCheckEvery = 25;
    constexpr int kStagnationWindow = 200;
    PowerState state;
    state.best.residual = std::numeric_limits<double>::infinity();
    x.normalize();
    double window_start_residual = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= budget; ++it) {
        state.used = it;
        const DenseVector y = apply_flat(m, x);
        const double lambda = x.dot(y);
        const double residual = (y - lambda * x).norm();
        if (residual < state.best.residual) state.best = {lambda, residual, iteration_offset + it, false, x};
        if (residual <= tol) {
            state.converged = true;
            return state;
        }
        const double ynorm = y.norm();
        if (ynorm == 0.0) {
            state.null_start = true;
            return state;
        }

        if (it % kCheckEvery == 0) {
            const DenseVector z = apply_flat(m, y);
            const double mu = x.dot(z);
            if (mu > 0.0) {
                const double root = std::sqrt(mu);
                const double two_step = (z - mu * x).norm();
                // Candidate eigenvectors for +root and -root inside span{x, y}.
                const DenseVector plus = x + y / root;
                const DenseVector minus = x - y / root;
                const bool take_plus = plus.norm() >= 1e-3 * minus.norm();
                const DenseVector& u = take_plus ? plus : minus;
                const double lam = take_plus ? root : -root;
                const double res = two_step / (root * u.norm());
                if (res <= tol) {
                    state.best = {lam, res, iteration_offset + it, true, u.normalized()};
                    state.converged = true;
                    return state;
                }
            }
        }
        if (it % kStagnationWindow == 0) {
            if (!(state.best.residual < 0.99 * window_start_residual)) return state;
            window_start_residual = state.best.residual;
        }
        x = y / ynorm;
    }
    return state;
}

} // namespace

SpectralEstimate estimate_lambda_max(const AdjacencyTensor& a, double tol, int max_iter) {
    if (a.is_zero()) throw DomainError("zero tensor: dominant eigenvalue undefined");
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (max_iter < 1) throw DomainError("max_iter must be positive");
    const auto& m = a.matrix();
    const Eigen::Index n = m.rows();

    DenseVector start = DenseVector::Ones(n);
    PowerState state = power_run(m, start, tol, max_iter, 0);
    if (state.converged) return state.best;

    const int used = state.used;
    if (used < max_iter) {
        // Restart once from a fixed-seed perturbation of the all-ones start.
        std::mt19937_64 rng(0x6d6c63656e74ULL);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        DenseVector perturbed(n);
        for (Eigen::Index i = 0; i < n; ++i) perturbed[i] = 1.0 + 0.5 * unif(rng);
        PowerState second = power_run(m, perturbed, tol, max_iter - used, used);
        if (second.converged) return second.best;
        if (second.best.residual < state.best.residual) state = second;
    }
    throw ConvergenceError("power iteration did not converge: best lambda " + std::to_string(state.best.lambda_max) +
                               ", residual " + std::to_string(state.best.residual) +
                               " (dominant eigenvalue may be complex or not unique in magnitude)",
                           state.best.lambda_max);
}

} // namespace mlcent
