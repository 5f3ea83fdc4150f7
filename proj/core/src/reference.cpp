#include "sqsolve/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sqsolve/errors.hpp"

namespace sqsolve::reference {

namespace {

// Visits every length-`len` tuple over {0, .., base-1} in lexicographic order.
template <class Fn>
void for_each_tuple(std::size_t base, std::size_t len, Fn&& fn)
{
    std::vector<Index> t(len, 0);
    while (true) {
        fn(std::span<const Index>(t));
        std::size_t pos = len;
        while (pos > 0) {
            --pos;
            if (++t[pos] < base) break;
            t[pos] = 0;
            if (pos == 0) return;
        }
        if (len == 0) return;
    }
}

double max_abs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

MomentCheck make_check(std::string name, Eigen::MatrixXd lhs, Eigen::MatrixXd rhs)
{
    MomentCheck c;
    c.name = std::move(name);
    c.max_abs_diff = max_abs(lhs, rhs);
    c.lhs = std::move(lhs);
    c.rhs = std::move(rhs);
    return c;
}

Eigen::MatrixXd as_colmajor(const SQMatrix& m)
{
    return m.entries();
}

} // namespace

DenseSolveResult exact_min_norm_solve(const SQMatrix& m, const DenseVector& b, double rel_tol,
                                      std::size_t max_iter)
{
    if (static_cast<Index>(b.size()) != m.rows()) {
        throw InvalidInput("right-hand side length does not match matrix rows");
    }
    const auto& A = m.entries();
    if (max_iter == 0) max_iter = 10 * std::max<std::size_t>(m.cols(), 1);

    DenseSolveResult out;
    DenseVector x = DenseVector::Zero(A.cols());
    DenseVector r = b;
    const double b_norm = b.norm();
    if (b_norm == 0.0) {
        out.x_star = x;
        out.converged = true;
        return out;
    }

    DenseVector s = A.transpose() * r;
    DenseVector p = s;
    double gamma = s.squaredNorm();
    std::size_t it = 0;
    for (; it < max_iter && r.norm() > rel_tol * b_norm; ++it) {
        const DenseVector q = A * p;
        const double qq = q.squaredNorm();
        if (qq == 0.0) break;
        const double step = gamma / qq;
        x += step * p;
        r -= step * q;
        s = A.transpose() * r;
        const double gamma_next = s.squaredNorm();
        if (gamma_next == 0.0) break;
        p = s + (gamma_next / gamma) * p;
        gamma = gamma_next;
    }

    out.residual_norm = (A * x - b).norm();
    out.converged = out.residual_norm <= rel_tol * b_norm;
    out.iterations = it;
    out.x_star = std::move(x);
    return out;
}

DenseSolveResult min_norm_from_factors(const Eigen::MatrixXd& U, std::span<const double> sigma,
                                       const Eigen::MatrixXd& V, const DenseVector& b)
{
    const auto k = static_cast<Eigen::Index>(sigma.size());
    if (U.cols() != k || V.cols() != k || U.rows() != b.size()) {
        throw InvalidInput("factor shapes do not match");
    }
    DenseVector coeffs = U.transpose() * b;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(sigma[static_cast<std::size_t>(i)] > 0.0)) throw InvalidInput("nonpositive singular value");
        coeffs(i) /= sigma[static_cast<std::size_t>(i)];
    }
    DenseSolveResult out;
    out.x_star = V * coeffs;
    Eigen::MatrixXd A = U * Eigen::VectorXd::Map(sigma.data(), k).asDiagonal() * V.transpose();
    out.residual_norm = (A * out.x_star - b).norm();
    out.converged = true;
    return out;
}

std::vector<DenseVector> gd_iterates(const SQMatrix& m, const DenseVector& b, double alpha,
                                     std::size_t K)
{
    if (static_cast<Index>(b.size()) != m.rows()) {
        throw InvalidInput("right-hand side length does not match matrix rows");
    }
    const auto& A = m.entries();
    std::vector<DenseVector> xs;
    xs.reserve(K + 1);
    xs.push_back(DenseVector::Zero(A.cols()));
    for (std::size_t k = 0; k < K; ++k) {
        const DenseVector& x = xs.back();
        xs.push_back(x - alpha * (A.transpose() * (A * x - b)));
    }
    return xs;
}

DenseVector rk_averaging_step(const SQMatrix& m, const DenseVector& b, const DenseVector& x,
                              std::span<const Index> rows, double alpha)
{
    if (rows.empty()) throw InvalidInput("empty row batch");
    const auto& A = m.entries();
    const double R = static_cast<double>(rows.size());
    DenseVector out = x;
    for (Index r : rows) {
        const auto ri = static_cast<Eigen::Index>(r);
        const double residual = A.row(ri).dot(x) - b(ri);
        out -= (alpha * residual / (R * m.row_probability(r))) * A.row(ri).transpose();
    }
    return out;
}

double spectral_norm_sq(const SQMatrix& m)
{
    const Eigen::MatrixXd A = as_colmajor(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A.transpose() * A, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

double MomentReport::max_abs_diff() const
{
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, c.max_abs_diff);
    return worst;
}

MomentReport check_amm_variance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                std::span<const double> probs, std::size_t S)
{
    const auto inner = static_cast<std::size_t>(X.cols());
    if (static_cast<std::size_t>(Y.rows()) != inner || probs.size() != inner) {
        throw InvalidInput("inner dimensions of X, Y and probs must agree");
    }
    if (inner == 0 || inner > 16) throw InvalidInput("inner dimension must be in 1..16");
    if (S == 0 || std::pow(static_cast<double>(inner), static_cast<double>(S)) > 1048576.0) {
        throw InvalidInput("enumeration too large");
    }

    std::vector<Eigen::MatrixXd> terms(inner);
    double variance_sum = 0.0;
    for (std::size_t i = 0; i < inner; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::MatrixXd outer = X.col(ii) * Y.row(ii);
        if (probs[i] < 0.0) throw InvalidInput("negative probability");
        if (probs[i] == 0.0) {
            if (outer.cwiseAbs().maxCoeff() > 0.0) {
                throw InvalidInput("zero-probability index " + std::to_string(i) +
                                   " has a nonzero contribution");
            }
            continue;
        }
        terms[i] = outer / probs[i];
        variance_sum += X.col(ii).squaredNorm() * Y.row(ii).squaredNorm() / probs[i];
    }

    const Eigen::MatrixXd XY = X * Y;
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(XY.rows(), XY.cols());
    double second = 0.0;
    const double inv_S = 1.0 / static_cast<double>(S);
    for_each_tuple(inner, S, [&](std::span<const Index> t) {
        double w = 1.0;
        for (Index i : t) w *= probs[i];
        if (w == 0.0) return;
        Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(XY.rows(), XY.cols());
        for (Index i : t) Z += terms[i];
        Z *= inv_S;
        mean += w * Z;
        second += w * (XY - Z).squaredNorm();
    });

    const double predicted = inv_S * (variance_sum - XY.squaredNorm());
    MomentReport rep;
    rep.checks.push_back(make_check("E[Z] = XY", mean, XY));
    rep.checks.push_back(make_check("E||XY - Z||_F^2", Eigen::MatrixXd::Constant(1, 1, second),
                                    Eigen::MatrixXd::Constant(1, 1, predicted)));
    return rep;
}

MomentReport check_Mk_moments(const SQMatrix& m, std::size_t R)
{
    if (m.rows() > 8) throw InvalidInput("moment enumeration needs n <= 8");
    if (R == 0 || R > 3) throw InvalidInput("moment enumeration needs 1 <= R <= 3");

    const Eigen::MatrixXd A = as_colmajor(m);
    const auto d = A.cols();
    const Eigen::MatrixXd AtA = A.transpose() * A;

    std::vector<Eigen::MatrixXd> terms(m.rows());
    for (Index r = 0; r < m.rows(); ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        if (m.row_sqnorm(r) > 0.0) {
            terms[r] = A.row(ri).transpose() * A.row(ri) / m.row_probability(r);
        }
    }

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    const double inv_R = 1.0 / static_cast<double>(R);
    for_each_tuple(m.rows(), R, [&](std::span<const Index> t) {
        double w = 1.0;
        for (Index r : t) w *= m.row_probability(r);
        if (w == 0.0) return;
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
        for (Index r : t) M += terms[r];
        M *= inv_R;
        mean += w * M;
        second += w * (M * M);
    });

    const Eigen::MatrixXd predicted = inv_R * m.frob_sq() * AtA + (1.0 - inv_R) * (AtA * AtA);
    MomentReport rep;
    rep.checks.push_back(make_check("E[M] = A^T A", mean, AtA));
    rep.checks.push_back(make_check("E[M^2]", second, predicted));
    return rep;
}

bool VarianceReport::all_hold() const
{
    return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& b) { return b.holds(); });
}

VarianceReport check_variance_bounds(const SQMatrix& m, const DenseVector& b,
                                     const DenseVector& x, std::size_t R, std::size_t C)
{
    const Index n = m.rows();
    const Index d = m.cols();
    if (n > 6 || d > 6) throw InvalidInput("variance enumeration needs n, d <= 6");
    if (R == 0 || R > 2 || C == 0 || C > 2) throw InvalidInput("variance enumeration needs R, C in 1..2");
    if (static_cast<Index>(b.size()) != n || static_cast<Index>(x.size()) != d) {
        throw InvalidInput("vector lengths do not match the matrix");
    }

    const Eigen::MatrixXd A = as_colmajor(m);
    const double frob_sq = m.frob_sq();
    const double spec_sq = spectral_norm_sq(m);
    const double inv_R = 1.0 / static_cast<double>(R);
    const double inv_C = 1.0 / static_cast<double>(C);

    Eigen::VectorXd D(static_cast<Eigen::Index>(n));
    for (Index r = 0; r < n; ++r) D(static_cast<Eigen::Index>(r)) = std::sqrt(m.row_sqnorm(r));

    double var_mz = 0.0, var_du = 0.0, var_dv = 0.0, worst_mean = 0.0;
    Eigen::VectorXd worst_lhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));

    for_each_tuple(n, R, [&](std::span<const Index> rows) {
        double w_rows = 1.0;
        for (Index r : rows) w_rows *= m.row_probability(r);
        if (w_rows == 0.0) return;

        Eigen::VectorXd Mx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (Index r : rows) {
            const auto ri = static_cast<Eigen::Index>(r);
            const double scale = inv_R / m.row_probability(r);
            Mx += scale * A.row(ri).dot(x) * A.row(ri).transpose();
            v(ri) += scale * b(ri);
        }
        var_dv += w_rows * D.cwiseProduct(v).squaredNorm();

        Eigen::VectorXd cond_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for_each_tuple(d, C, [&](std::span<const Index> cols) {
            double w_cols = 1.0;
            for (Index c : cols) w_cols *= m.col_probability(c);
            if (w_cols == 0.0) return;

            Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
            Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (Index r : rows) {
                const auto ri = static_cast<Eigen::Index>(r);
                double inner = 0.0;
                for (Index c : cols) {
                    const auto ci = static_cast<Eigen::Index>(c);
                    inner += inv_C * A(ri, ci) * x(ci) / m.col_probability(c);
                }
                const double scale = inv_R / m.row_probability(r);
                z += scale * inner * A.row(ri).transpose();
                u(ri) += scale * inner;
            }
            const Eigen::VectorXd diff = Mx - z;
            cond_mean += w_cols * diff;
            var_mz += w_rows * w_cols * diff.squaredNorm();
            var_du += w_rows * w_cols * D.cwiseProduct(u).squaredNorm();
        });
        const double gap = cond_mean.cwiseAbs().maxCoeff();
        if (gap >= worst_mean) {
            worst_mean = gap;
            worst_lhs = cond_mean;
        }
    });

    const double x_sq = x.squaredNorm();
    const double b_sq = b.squaredNorm();
    const double RC = static_cast<double>(R * C);

    VarianceReport rep;
    rep.conditional_mean = make_check("E[Mx - z | M] = 0", worst_lhs,
                                      Eigen::VectorXd::Zero(worst_lhs.size()));
    rep.bounds.push_back({"E||Mx - z||^2", var_mz,
                          (frob_sq * frob_sq / RC + frob_sq * spec_sq * inv_C) * x_sq});
    rep.bounds.push_back({"E||Du||^2", var_du,
                          (frob_sq * frob_sq / RC + frob_sq * spec_sq * inv_R + spec_sq * spec_sq) * x_sq});
    rep.bounds.push_back({"E||Dv||^2", var_dv, frob_sq * b_sq * inv_R + spec_sq * b_sq});
    return rep;
}

} // namespace sqsolve::reference
