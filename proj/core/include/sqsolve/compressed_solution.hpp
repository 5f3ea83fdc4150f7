#pragma once

#include <cstddef>
#include <memory>
#include <mutex>

#include "sqsolve/discrete_sampler.hpp"
#include "sqsolve/random_stream.hpp"
#include "sqsolve/sparse_iterate.hpp"
#include "sqsolve/sq_matrix.hpp"

namespace sqsolve {

/// Dense x = A^T y, O(stored(y) * d).
DenseVector dual_to_primal(const SQMatrix& m, const SparseIterate& y);

/// Outcome of one rejection-sampled draw from D_x.
struct SampleStats {
    Index accepted_index = 0;
    /// Proposal rounds used, including the accepted one (always >= 1).
    std::size_t iterations_used = 0;
    double phi_at_sample = 0.0;
};

// =============================================================================
/// Implicit solution x = A^T y for a sparse y, answering entry queries and
/// drawing indices j with probability |x_j|^2 / ||x||^2.
///
/// Sampling is rejection sampling against the proposal
///
///     P(j) = sum_i y_i^2 A[i][j]^2 / sum_i y_i^2 ||A_i||^2,
///
/// realized by picking row i with weight y_i^2 ||A_i||^2 and then a column
/// within row i from the matrix's own entry sampler. A candidate j is kept
/// with probability
///
///     r(j) = (sum_i A[i][j] y_i)^2 / (s * sum_i y_i^2 A[i][j]^2),  s = nnz(y),
///
/// which is at most 1 by Cauchy-Schwarz. The expected number of rounds is
/// phi(y) = s * sum_i y_i^2 ||A_i||^2 / ||A^T y||^2.
///
/// The proposal CDF and ||x||^2 are computed lazily, guarded by a mutex, and
/// dropped whenever y is mutated through `set_coefficient`. Concurrent
/// queries and samples are fine with per-caller streams; mutation is not
/// safe concurrently with reads.
///
class CompressedSolution {
public:
    CompressedSolution(std::shared_ptr<const SQMatrix> matrix, SparseIterate y);

    CompressedSolution(CompressedSolution&&) noexcept;
    CompressedSolution& operator=(CompressedSolution&&) noexcept;
    ~CompressedSolution();

    const SQMatrix& matrix() const noexcept { return *matrix_; }
    std::shared_ptr<const SQMatrix> matrix_handle() const noexcept { return matrix_; }
    const SparseIterate& iterate() const noexcept { return y_; }

    /// x_j = (A^T y)_j in O(stored(y)). Throws std::out_of_range.
    double query(Index j) const;

    DenseVector dense() const { return dual_to_primal(*matrix_, y_); }

    /// ||A^T y||^2, cached.
    double x_sqnorm() const;

    /// ||D y||^2 = sum_r y_r^2 ||A_r||^2.
    double weighted_sqnorm() const;

    /// Throws DegenerateError if ||A^T y||^2 is zero (or below 1e-300).
    double compute_phi() const;

    /// One draw from D_x. Throws DegenerateError for a degenerate x and
    /// SamplingCapExceeded after 100 * max(1, ceil(phi)) rejected rounds.
    SampleStats sample(RandomStream& rng) const;

    /// Acceptance ratio r(j) for column j. Exposed for testing.
    double acceptance_ratio(Index j) const;

    /// Replace y_r and invalidate cached quantities.
    void set_coefficient(Index r, double value);

private:
    struct Cache;
    std::shared_ptr<const Cache> cache() const;

    std::shared_ptr<const SQMatrix> matrix_;
    SparseIterate y_;
    mutable std::unique_ptr<std::mutex> cache_mutex_;
    mutable std::shared_ptr<const Cache> cache_;
};

} // namespace sqsolve
