#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sqsolve/compressed_solution.hpp"
#include "sqsolve/random_stream.hpp"
#include "sqsolve/sparse_iterate.hpp"
#include "sqsolve/sq_matrix.hpp"

namespace sqsolve {

// =============================================================================
/// Step size, batch sizes and iteration count, together with the condition
/// numbers they were derived from.
///
struct SolverParams {
    double alpha = 0.0;      ///< step size, 1 / ||A||^2 by default
    std::size_t R = 1;       ///< rows per iteration
    std::size_t C = 1;       ///< columns per iteration, shared by all rows
    std::size_t K = 0;       ///< iterations
    double eps = 0.0;        ///< target relative accuracy
    double kappa_sq = 0.0;   ///< ||A||^2 ||A^+||^2
    double kappaF_sq = 0.0;  ///< ||A||_F^2 ||A^+||^2

    /// Throws InvalidInput unless alpha > 0 and R, C >= 1. K = 0 is allowed
    /// (the iterate stays at zero).
    void validate() const;
};

/// ceil(x), except that values within 1e-9 (relative) of an integer snap to
/// that integer, so 10 * 312.7 / 0.1^2 gives 312700 rather than 312701.
std::size_t snapped_ceil(double x);

/// alpha = 1/||A||^2, R = ceil(2 kF^2 / k^2), C = ceil(10 kF^2 / eps^2),
/// K = ceil(4 k^2 log(1/eps)).
///
/// Requires eps in (0, 1/4], kappa_sq >= 1 and kappaF_sq >= kappa_sq.
/// Without `spectral_sq` the step uses ||A||^2 = kappa_sq ||A||_F^2 / kappaF_sq,
/// which follows from the two condition numbers sharing ||A^+||.
SolverParams default_params(const SQMatrix& m, double eps, double kappa_sq, double kappaF_sq,
                            std::optional<double> spectral_sq = std::nullopt);

/// Power iteration on A^T A from a random start; returns the Rayleigh
/// quotient ||A v||^2 for the final unit vector v, an estimate of ||A||^2.
double estimate_spectral_norm(const SQMatrix& m, std::size_t iters, RandomStream& rng);

/// Row and column indices drawn for one iteration, with replacement and in
/// draw order. Duplicates are kept.
struct BatchDraw {
    std::vector<Index> rows;
    std::vector<Index> cols;
};

/// Draws C columns from D^col and then R rows from D^row.
BatchDraw draw_batch(const SQMatrix& m, const SolverParams& p, RandomStream& rng);

/// Applies one iteration for a given draw:
///
///   beta_c  = sum_{i : y_i != 0} A[i][c] y_i                 (c in cols)
///   gamma_r = (1/C) sum_{c in cols} A[r][c] beta_c / q_c - b_r
///   y_r    -= alpha * gamma_r / (R p_r)                      (each r in rows)
///
/// beta is evaluated once per distinct column from the pre-update iterate,
/// and each occurrence of a row applies its own update. Throws
/// DegenerateError if an update is not finite.
void apply_batch(const SQMatrix& m, std::span<const double> b, SparseIterate& y,
                 const SolverParams& p, const BatchDraw& draw);

/// The column-averaged version of `apply_batch`: gamma_r uses the exact
/// inner product (A A^T y)_r - b_r. In the primal variable this is one step
/// of randomized Kaczmarz with averaging over `rows`.
void apply_rows_exact(const SQMatrix& m, std::span<const double> b, SparseIterate& y,
                      double alpha, std::span<const Index> rows);

/// One full iteration: draw_batch followed by apply_batch.
void step(const SQMatrix& m, std::span<const double> b, SparseIterate& y, const SolverParams& p,
          RandomStream& rng);

/// Called after each iteration with the iteration count k (1-based) and the
/// current iterate. Observers must not retain the reference.
using IterationHook = std::function<void(std::size_t k, const SparseIterate& y)>;

/// Runs K iterations from y = 0 and wraps the result.
CompressedSolution solve(std::shared_ptr<const SQMatrix> m, std::span<const double> b,
                         const SolverParams& p, RandomStream& rng,
                         const IterationHook& hook = {});

} // namespace sqsolve
