#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqsolve/sq_matrix.hpp"

// Independent oracles used to check the solver: an exact minimum-norm
// solve, deterministic gradient descent, randomized Kaczmarz with averaging,
// and exact enumeration of the moment identities and variance bounds the
// row/column estimator satisfies.
//
// Everything here works on dense Eigen data and never calls into the solver.
namespace sqsolve::reference {

struct DenseSolveResult {
    DenseVector x_star;
    double residual_norm = 0.0;   ///< ||A x* - b||
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimum-norm solution of a consistent system by CGLS (conjugate gradient
/// on the normal equations) from x = 0, so every iterate stays in
/// range(A^T). Stops once ||A x - b|| <= rel_tol ||b||; if `max_iter`
/// (default 10 * d) runs out first the result is returned with
/// converged = false.
DenseSolveResult exact_min_norm_solve(const SQMatrix& m, const DenseVector& b,
                                      double rel_tol = 1e-12, std::size_t max_iter = 0);

/// x* = V diag(1/sigma) U^T b for A = U diag(sigma) V^T with orthonormal
/// columns in U and V.
DenseSolveResult min_norm_from_factors(const Eigen::MatrixXd& U, std::span<const double> sigma,
                                       const Eigen::MatrixXd& V, const DenseVector& b);

/// x_{k+1} = x_k - alpha A^T (A x_k - b) from x_0 = 0. Returns x_0 .. x_K.
std::vector<DenseVector> gd_iterates(const SQMatrix& m, const DenseVector& b, double alpha,
                                     std::size_t K);

/// x - alpha (1/R) sum_{r in rows} a_r (a_r^T x - b_r) / p_r
DenseVector rk_averaging_step(const SQMatrix& m, const DenseVector& b, const DenseVector& x,
                              std::span<const Index> rows, double alpha);

/// ||A||^2 from the largest eigenvalue of A^T A.
double spectral_norm_sq(const SQMatrix& m);

/// One exact equality: the two sides and their largest entrywise gap.
struct MomentCheck {
    std::string name;
    Eigen::MatrixXd lhs;
    Eigen::MatrixXd rhs;
    double max_abs_diff = 0.0;
};

struct MomentReport {
    std::vector<MomentCheck> checks;

    double max_abs_diff() const;
};

/// Z = (1/S) sum_{s in S} X e_s e_s^T Y / p_s with S iid draws from `probs`.
/// Enumerates all m^S index tuples and checks E[Z] = X Y and
/// E||XY - Z||_F^2 = (1/S) (sum_i ||X e_i||^2 ||e_i^T Y||^2 / p_i - ||XY||_F^2).
/// Requires m <= 16 and m^S <= 2^20. Throws InvalidInput when a
/// zero-probability index carries a nonzero outer product.
MomentReport check_amm_variance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                std::span<const double> probs, std::size_t S = 1);

/// M = (1/R) sum_{r in rows} a_r a_r^T / p_r. Enumerates the n^R row tuples
/// and checks E[M] = A^T A and
/// E[M^2] = (1/R) ||A||_F^2 A^T A + (1 - 1/R) (A^T A)^2.
/// Requires n <= 8 and R <= 3.
MomentReport check_Mk_moments(const SQMatrix& m, std::size_t R);

/// An enumerated expectation against its upper bound.
struct BoundCheck {
    std::string name;
    double enumerated = 0.0;
    double bound = 0.0;

    bool holds() const noexcept { return enumerated <= bound; }
};

struct VarianceReport {
    /// max over row tuples of |E[M x - z | rows]|, which must vanish
    MomentCheck conditional_mean;
    std::vector<BoundCheck> bounds;

    bool all_hold() const;
};

/// Enumerates every (rows, cols) batch for R rows and C columns and checks
///   E[M x - z | M] = 0,
///   E||M x - z||^2 <= (F^4/(RC) + F^2 S/C) ||x||^2,
///   E||D u||^2     <= (F^4/(RC) + F^2 S/R + S^2) ||x||^2,
///   E||D v||^2     <= F^2 ||b||^2 / R + S ||b||^2,
/// with F^2 = ||A||_F^2, S = ||A||^2 and D = diag(||a_r||).
/// Requires n, d <= 6 and R, C <= 2.
VarianceReport check_variance_bounds(const SQMatrix& m, const DenseVector& b,
                                     const DenseVector& x, std::size_t R, std::size_t C);

} // namespace sqsolve::reference
