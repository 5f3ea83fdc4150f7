#include "sqsolve/sq_matrix.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

#include "sqsolve/errors.hpp"

namespace sqsolve {

struct SQMatrix::RowCache {
    explicit RowCache(Index n) : once(n), samplers(n) {}

    std::vector<std::once_flag> once;
    std::vector<DiscreteSampler> samplers;
};

SQMatrix::SQMatrix(DenseMatrix entries)
    : entries_(std::move(entries))
{
    const Index n = rows();
    const Index d = cols();
    if (n == 0 || d == 0) {
        throw InvalidInput("matrix must have at least one row and one column");
    }

    row_sqnorms_.assign(n, 0.0);
    col_sqnorms_.assign(d, 0.0);
    for (Index r = 0; r < n; ++r) {
        const auto row_r = row(r);
        double acc = 0.0;
        for (Index c = 0; c < d; ++c) {
            const double v = row_r[c];
            if (!std::isfinite(v)) {
                throw InvalidInput("non-finite entry at (" + std::to_string(r) + ", " +
                                   std::to_string(c) + ")");
            }
            const double v2 = v * v;
            acc += v2;
            col_sqnorms_[c] += v2;
        }
        row_sqnorms_[r] = acc;
        frob_sq_ += acc;
    }
    if (!(frob_sq_ > 0.0)) {
        throw InvalidInput("all-zero matrix has no row or column distribution");
    }

    row_sampler_ = DiscreteSampler(row_sqnorms_);
    col_sampler_ = DiscreteSampler(col_sqnorms_);
    row_cache_ = std::make_unique<RowCache>(n);
}

SQMatrix::SQMatrix(SQMatrix&&) noexcept = default;
SQMatrix& SQMatrix::operator=(SQMatrix&&) noexcept = default;
SQMatrix::~SQMatrix() = default;

double SQMatrix::query_entry(Index r, Index c) const
{
    if (r >= rows() || c >= cols()) {
        throw std::out_of_range("entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                ") outside " + std::to_string(rows()) + "x" +
                                std::to_string(cols()));
    }
    return (*this)(r, c);
}

const DiscreteSampler& SQMatrix::row_entry_sampler(Index r) const
{
    if (r >= rows()) {
        throw std::out_of_range("row " + std::to_string(r) + " out of range");
    }
    if (!(row_sqnorms_[r] > 0.0)) {
        throw InvalidInput("row " + std::to_string(r) + " has zero norm");
    }
    std::call_once(row_cache_->once[r], [&] {
        std::vector<double> sq(cols());
        const auto row_r = row(r);
        for (Index c = 0; c < cols(); ++c) sq[c] = row_r[c] * row_r[c];
        row_cache_->samplers[r] = DiscreteSampler(sq);
    });
    return row_cache_->samplers[r];
}

Index SQMatrix::sample_entry_in_row(Index r, RandomStream& rng) const
{
    return row_entry_sampler(r).draw(rng);
}

void SQMatrix::prebuild_row_entry_samplers() const
{
    for (Index r = 0; r < rows(); ++r) {
        if (row_sqnorms_[r] > 0.0) row_entry_sampler(r);
    }
}

} // namespace sqsolve
