#include "sqsolve/compressed_solution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqsolve/errors.hpp"

namespace sqsolve {

namespace {

constexpr double kDegenerateSqnorm = 1e-300;

} // namespace

DenseVector dual_to_primal(const SQMatrix& m, const SparseIterate& y)
{
    const Index d = m.cols();
    DenseVector x = DenseVector::Zero(static_cast<Eigen::Index>(d));
    const auto idx = y.indices();
    const auto val = y.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (val[k] == 0.0) continue;
        const auto row = m.row(idx[k]);
        for (Index c = 0; c < d; ++c) x(static_cast<Eigen::Index>(c)) += row[c] * val[k];
    }
    return x;
}

struct CompressedSolution::Cache {
    std::uint64_t version = 0;
    double x_sqnorm = 0.0;
    double weighted_sqnorm = 0.0;
    std::size_t nnz = 0;
    // support restricted to nonzero values, in iterate order
    std::vector<Index> rows;
    std::vector<double> coeffs;
    DiscreteSampler proposal;
    double phi = 0.0;
};

CompressedSolution::CompressedSolution(std::shared_ptr<const SQMatrix> matrix, SparseIterate y)
    : matrix_(std::move(matrix)), y_(std::move(y)), cache_mutex_(std::make_unique<std::mutex>())
{
    if (!matrix_) throw InvalidInput("compressed solution needs a matrix");
    if (y_.dimension() != matrix_->rows()) {
        throw InvalidInput("iterate dimension " + std::to_string(y_.dimension()) +
                           " does not match matrix rows " + std::to_string(matrix_->rows()));
    }
}

CompressedSolution::CompressedSolution(CompressedSolution&&) noexcept = default;
CompressedSolution& CompressedSolution::operator=(CompressedSolution&&) noexcept = default;
CompressedSolution::~CompressedSolution() = default;

double CompressedSolution::query(Index j) const
{
    if (j >= matrix_->cols()) {
        throw std::out_of_range("column " + std::to_string(j) + " out of range");
    }
    const auto idx = y_.indices();
    const auto val = y_.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) acc += (*matrix_)(idx[k], j) * val[k];
    return acc;
}

std::shared_ptr<const CompressedSolution::Cache> CompressedSolution::cache() const
{
    std::lock_guard lock(*cache_mutex_);
    if (cache_ && cache_->version == y_.version()) return cache_;

    auto c = std::make_shared<Cache>();
    c->version = y_.version();
    c->x_sqnorm = dense().squaredNorm();

    std::vector<double> weights;
    const auto idx = y_.indices();
    const auto val = y_.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (val[k] == 0.0) continue;
        const double w = val[k] * val[k] * matrix_->row_sqnorm(idx[k]);
        c->rows.push_back(idx[k]);
        c->coeffs.push_back(val[k]);
        weights.push_back(w);
        c->weighted_sqnorm += w;
    }
    c->nnz = c->rows.size();
    if (c->weighted_sqnorm > 0.0) c->proposal = DiscreteSampler(weights);
    if (c->x_sqnorm >= kDegenerateSqnorm) {
        c->phi = static_cast<double>(c->nnz) * c->weighted_sqnorm / c->x_sqnorm;
    }
    cache_ = std::move(c);
    return cache_;
}

double CompressedSolution::x_sqnorm() const
{
    return cache()->x_sqnorm;
}

double CompressedSolution::weighted_sqnorm() const
{
    return cache()->weighted_sqnorm;
}

double CompressedSolution::compute_phi() const
{
    const auto c = cache();
    if (!(c->x_sqnorm >= kDegenerateSqnorm)) {
        throw DegenerateError("||A^T y||^2 is zero; phi(y) undefined and D_x does not exist");
    }
    return c->phi;
}

double CompressedSolution::acceptance_ratio(Index j) const
{
    if (j >= matrix_->cols()) {
        throw std::out_of_range("column " + std::to_string(j) + " out of range");
    }
    const auto c = cache();
    double dot = 0.0;
    double weighted = 0.0;
    for (std::size_t k = 0; k < c->rows.size(); ++k) {
        const double a = (*matrix_)(c->rows[k], j);
        dot += a * c->coeffs[k];
        weighted += c->coeffs[k] * c->coeffs[k] * a * a;
    }
    if (weighted == 0.0) return 0.0;
    return dot * dot / (static_cast<double>(c->nnz) * weighted);
}

SampleStats CompressedSolution::sample(RandomStream& rng) const
{
    const auto c = cache();
    if (!(c->x_sqnorm >= kDegenerateSqnorm)) {
        throw DegenerateError("||A^T y||^2 is zero; cannot sample from D_x");
    }
    const std::size_t cap = 100 * std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c->phi)));
    const double s = static_cast<double>(c->nnz);

    for (std::size_t round = 1; round <= cap; ++round) {
        const Index row = c->rows[c->proposal.draw(rng)];
        const Index col = matrix_->sample_entry_in_row(row, rng);

        double dot = 0.0;
        double weighted = 0.0;
        for (std::size_t k = 0; k < c->rows.size(); ++k) {
            const double a = (*matrix_)(c->rows[k], col);
            dot += a * c->coeffs[k];
            weighted += c->coeffs[k] * c->coeffs[k] * a * a;
        }
        const double ratio = dot * dot / (s * weighted);
        if (rng.uniform() < ratio) return {col, round, c->phi};
    }
    throw SamplingCapExceeded(cap, c->phi);
}

void CompressedSolution::set_coefficient(Index r, double value)
{
    std::lock_guard lock(*cache_mutex_);
    y_.set(r, value);
    cache_.reset();
}

} // namespace sqsolve
