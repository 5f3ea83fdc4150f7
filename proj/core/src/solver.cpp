#include "sqsolve/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sqsolve/errors.hpp"

namespace sqsolve {

void SolverParams::validate() const
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InvalidInput("step size alpha must be positive and finite");
    }
    if (R < 1) throw InvalidInput("row batch size R must be at least 1");
    if (C < 1) throw InvalidInput("column batch size C must be at least 1");
}

std::size_t snapped_ceil(double x)
{
    if (!std::isfinite(x) || x < 0.0) throw InvalidInput("ceiling of a negative or non-finite value");
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(x));
}

SolverParams default_params(const SQMatrix& m, double eps, double kappa_sq, double kappaF_sq,
                            std::optional<double> spectral_sq)
{
    if (!(eps > 0.0 && eps <= 0.25)) {
        throw InvalidInput("eps must lie in (0, 1/4], got " + std::to_string(eps));
    }
    if (!(kappa_sq >= 1.0)) throw InvalidInput("kappa^2 must be at least 1");
    if (!(kappaF_sq >= kappa_sq)) throw InvalidInput("kappa_F^2 must be at least kappa^2");

    const double norm_sq = spectral_sq ? *spectral_sq : kappa_sq * m.frob_sq() / kappaF_sq;
    if (!(norm_sq > 0.0) || !std::isfinite(norm_sq)) {
        throw InvalidInput("spectral norm squared must be positive");
    }

    SolverParams p;
    p.alpha = 1.0 / norm_sq;
    p.R = snapped_ceil(2.0 * kappaF_sq / kappa_sq);
    p.C = snapped_ceil(10.0 * kappaF_sq / (eps * eps));
    p.K = snapped_ceil(4.0 * kappa_sq * std::log(1.0 / eps));
    p.eps = eps;
    p.kappa_sq = kappa_sq;
    p.kappaF_sq = kappaF_sq;
    return p;
}

double estimate_spectral_norm(const SQMatrix& m, std::size_t iters, RandomStream& rng)
{
    const auto& A = m.entries();
    DenseVector v(static_cast<Eigen::Index>(m.cols()));
    for (Eigen::Index c = 0; c < v.size(); ++c) v(c) = rng.normal();
    v.normalize();

    double estimate = (A * v).squaredNorm();
    for (std::size_t it = 0; it < iters; ++it) {
        DenseVector w = A.transpose() * (A * v);
        const double norm = w.norm();
        if (norm == 0.0) break;  // start vector in the null space
        v = w / norm;
        estimate = (A * v).squaredNorm();
    }
    return estimate;
}

BatchDraw draw_batch(const SQMatrix& m, const SolverParams& p, RandomStream& rng)
{
    BatchDraw draw;
    draw.cols.resize(p.C);
    for (auto& c : draw.cols) c = m.sample_col(rng);
    draw.rows.resize(p.R);
    for (auto& r : draw.rows) r = m.sample_row(rng);
    return draw;
}

namespace {

void check_rhs(const SQMatrix& m, std::span<const double> b)
{
    if (b.size() != m.rows()) {
        throw InvalidInput("right-hand side has length " + std::to_string(b.size()) +
                           ", expected " + std::to_string(m.rows()));
    }
}

// Applies y_r -= alpha * gamma_r / (R p_r) for each occurrence of r, where
// gamma(r) is evaluated against the pre-update iterate.
template <class Gamma>
void update_rows(const SQMatrix& m, SparseIterate& y, double alpha,
                 std::span<const Index> rows, Gamma&& gamma)
{
    const double R = static_cast<double>(rows.size());
    std::vector<double> deltas(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Index r = rows[k];
        // duplicates share gamma; reuse the first occurrence's delta
        auto first = std::find(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k), r);
        if (first != rows.begin() + static_cast<std::ptrdiff_t>(k)) {
            deltas[k] = deltas[static_cast<std::size_t>(first - rows.begin())];
            continue;
        }
        deltas[k] = -alpha * gamma(r) / (R * m.row_probability(r));
        if (!std::isfinite(deltas[k])) {
            throw DegenerateError("non-finite update for row " + std::to_string(r));
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) y.add(rows[k], deltas[k]);
    y.mark_iteration();
}

} // namespace

void apply_batch(const SQMatrix& m, std::span<const double> b, SparseIterate& y,
                 const SolverParams& p, const BatchDraw& draw)
{
    check_rhs(m, b);
    if (draw.cols.empty() || draw.rows.empty()) throw InvalidInput("empty batch");

    // multiplicity of each column in the batch
    std::vector<Index> distinct(draw.cols.begin(), draw.cols.end());
    std::sort(distinct.begin(), distinct.end());
    std::vector<double> count;
    {
        std::vector<Index> uniq;
        for (std::size_t k = 0; k < distinct.size();) {
            std::size_t j = k;
            while (j < distinct.size() && distinct[j] == distinct[k]) ++j;
            uniq.push_back(distinct[k]);
            count.push_back(static_cast<double>(j - k));
            k = j;
        }
        distinct = std::move(uniq);
    }

    // beta_c = (A^T y)_c over the distinct columns, from the pre-update y
    std::vector<double> beta(distinct.size(), 0.0);
    const auto idx = y.indices();
    const auto val = y.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (val[k] == 0.0) continue;
        const auto row = m.row(idx[k]);
        for (std::size_t j = 0; j < distinct.size(); ++j) beta[j] += row[distinct[j]] * val[k];
    }

    // (1/C) * multiplicity / q_c, folded into beta
    const double C = static_cast<double>(draw.cols.size());
    for (std::size_t j = 0; j < distinct.size(); ++j) {
        beta[j] *= count[j] / (C * m.col_probability(distinct[j]));
    }

    update_rows(m, y, p.alpha, draw.rows, [&](Index r) {
        const auto row = m.row(r);
        double acc = 0.0;
        for (std::size_t j = 0; j < distinct.size(); ++j) acc += row[distinct[j]] * beta[j];
        return acc - b[r];
    });
}

void apply_rows_exact(const SQMatrix& m, std::span<const double> b, SparseIterate& y,
                      double alpha, std::span<const Index> rows)
{
    check_rhs(m, b);
    if (rows.empty()) throw InvalidInput("empty row batch");
    const DenseVector x = dual_to_primal(m, y);
    const Index d = m.cols();
    update_rows(m, y, alpha, rows, [&](Index r) {
        const auto row = m.row(r);
        double acc = 0.0;
        for (Index c = 0; c < d; ++c) acc += row[c] * x(static_cast<Eigen::Index>(c));
        return acc - b[r];
    });
}

void step(const SQMatrix& m, std::span<const double> b, SparseIterate& y, const SolverParams& p,
          RandomStream& rng)
{
    apply_batch(m, b, y, p, draw_batch(m, p, rng));
}

CompressedSolution solve(std::shared_ptr<const SQMatrix> m, std::span<const double> b,
                         const SolverParams& p, RandomStream& rng, const IterationHook& hook)
{
    if (!m) throw InvalidInput("solve needs a matrix");
    p.validate();
    check_rhs(*m, b);
    for (double v : b) {
        if (!std::isfinite(v)) throw InvalidInput("right-hand side has a non-finite entry");
    }

    SparseIterate y(m->rows());
    for (std::size_t k = 1; k <= p.K; ++k) {
        step(*m, b, y, p, rng);
        if (hook) hook(k, y);
    }
    return CompressedSolution(std::move(m), std::move(y));
}

} // namespace sqsolve
