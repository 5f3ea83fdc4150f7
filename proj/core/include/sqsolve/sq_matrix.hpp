#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqsolve/discrete_sampler.hpp"
#include "sqsolve/random_stream.hpp"

namespace sqsolve {

using Index = std::size_t;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DenseVector = Eigen::VectorXd;

// =============================================================================
/// Dense real matrix with sample-and-query access.
///
/// On construction the squared row norms, squared column norms and Frobenius
/// norm are computed in a single pass, together with prefix sums that let us
/// draw
///   - a row r with probability p_r = ||A_r||^2 / ||A||_F^2,
///   - a column c with probability q_c = ||A e_c||^2 / ||A||_F^2,
///   - a column c within row r with probability A[r][c]^2 / ||A_r||^2.
///
/// Entry and norm queries are O(1); row and column draws are O(log n) and
/// O(log d). The per-row entry samplers are built on first use and cached;
/// the cache is internally synchronized, so one SQMatrix may be shared by
/// concurrent callers as long as each owns its RandomStream.
///
class SQMatrix {
public:
    /// Throws InvalidInput on an empty shape, a non-finite entry, or an
    /// all-zero matrix.
    explicit SQMatrix(DenseMatrix entries);

    SQMatrix(SQMatrix&&) noexcept;
    SQMatrix& operator=(SQMatrix&&) noexcept;
    SQMatrix(const SQMatrix&) = delete;
    SQMatrix& operator=(const SQMatrix&) = delete;
    ~SQMatrix();

    Index rows() const noexcept { return static_cast<Index>(entries_.rows()); }
    Index cols() const noexcept { return static_cast<Index>(entries_.cols()); }

    /// Bounds-checked entry query. Throws std::out_of_range.
    double query_entry(Index r, Index c) const;

    /// Unchecked entry access for inner loops.
    double operator()(Index r, Index c) const noexcept
    {
        return entries_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    std::span<const double> row(Index r) const noexcept
    {
        return {entries_.data() + r * cols(), cols()};
    }

    const DenseMatrix& entries() const noexcept { return entries_; }

    double row_sqnorm(Index r) const { return row_sqnorms_.at(r); }
    double col_sqnorm(Index c) const { return col_sqnorms_.at(c); }
    std::span<const double> row_sqnorms() const noexcept { return row_sqnorms_; }
    std::span<const double> col_sqnorms() const noexcept { return col_sqnorms_; }
    double frob_sq() const noexcept { return frob_sq_; }

    /// p_r
    double row_probability(Index r) const { return row_sqnorms_.at(r) / frob_sq_; }
    /// q_c
    double col_probability(Index c) const { return col_sqnorms_.at(c) / frob_sq_; }

    std::span<const double> row_cdf() const noexcept { return row_sampler_.cdf(); }
    std::span<const double> col_cdf() const noexcept { return col_sampler_.cdf(); }

    Index sample_row(RandomStream& rng) const { return row_sampler_.draw(rng); }
    Index sample_col(RandomStream& rng) const { return col_sampler_.draw(rng); }

    /// Column drawn with probability A[r][c]^2 / ||A_r||^2. Throws
    /// std::out_of_range for a bad row and InvalidInput for a zero row.
    Index sample_entry_in_row(Index r, RandomStream& rng) const;

    /// Entry sampler for row r, built on first use.
    const DiscreteSampler& row_entry_sampler(Index r) const;

    /// Eagerly build every nonzero row's entry sampler.
    void prebuild_row_entry_samplers() const;

private:
    struct RowCache;

    DenseMatrix entries_;
    std::vector<double> row_sqnorms_;
    std::vector<double> col_sqnorms_;
    double frob_sq_ = 0.0;
    DiscreteSampler row_sampler_;
    DiscreteSampler col_sampler_;
    std::unique_ptr<RowCache> row_cache_;
};

} // namespace sqsolve
