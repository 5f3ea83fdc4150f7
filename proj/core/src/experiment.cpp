#include "sqsolve/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "sqsolve/compressed_solution.hpp"
#include "sqsolve/errors.hpp"
#include "sqsolve/reference.hpp"
#include "sqsolve/stats.hpp"

namespace sqsolve::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double phi_or_nan(const SQMatrix& m, const SparseIterate& y, const DenseVector& x)
{
    const double x_sq = x.squaredNorm();
    if (!(x_sq >= 1e-300)) return kNaN;
    double weighted = 0.0;
    const auto idx = y.indices();
    const auto val = y.values();
    for (std::size_t k = 0; k < idx.size(); ++k) weighted += val[k] * val[k] * m.row_sqnorm(idx[k]);
    return static_cast<double>(y.nnz()) * weighted / x_sq;
}

void write_double(std::ostream& out, double v)
{
    if (std::isnan(v)) out << "nan";
    else out << v;
}

} // namespace

ProblemInstance ProblemInstance::from_generated(const problems::GeneratedProblem& p)
{
    return {p.matrix, p.b, p.x_star, p.kappa_sq, p.kappaF_sq, p.spectral_norm_sq()};
}

SolverParams resolve_params(const ProblemInstance& problem, double eps, const ParamOverrides& o)
{
    if (!problem.matrix) throw InvalidInput("problem has no matrix");
    SolverParams p = default_params(*problem.matrix, eps, problem.kappa_sq, problem.kappaF_sq,
                                    problem.spectral_norm_sq);
    if (o.R) p.R = *o.R;
    if (o.C) p.C = *o.C;
    if (o.K) p.K = *o.K;
    if (o.alpha) p.alpha = *o.alpha;
    p.validate();
    return p;
}

double relative_error(const DenseVector& x, const DenseVector& x_star)
{
    const double ref = x_star.norm();
    const double err = (x - x_star).norm();
    return ref > 0.0 ? err / ref : err;
}

std::vector<TrialOutcome> run_trials(const ProblemInstance& problem, const SolverParams& params,
                                     std::size_t trials, std::uint64_t seed, std::size_t threads)
{
    if (trials == 0) throw InvalidInput("trials must be at least 1");
    std::vector<TrialOutcome> out(trials);
    const RandomStream master(seed);
    stats::parallel_for(trials, threads, [&](std::size_t t) {
        RandomStream rng = master.split(t);
        const CompressedSolution sol = solve(problem.matrix, std::span<const double>(problem.b.data(), static_cast<std::size_t>(problem.b.size())), params, rng);
        const DenseVector x = sol.dense();
        TrialOutcome& o = out[t];
        o.trial = t;
        o.rel_error = relative_error(x, problem.x_star);
        o.stored = sol.iterate().stored();
        o.nnz = sol.iterate().nnz();
        o.phi = phi_or_nan(sol.matrix(), sol.iterate(), x);
    });
    return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes)
{
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "trial,rel_error,stored,nnz,phi\n";
    for (const auto& o : outcomes) {
        out << o.trial << ',';
        write_double(out, o.rel_error);
        out << ',' << o.stored << ',' << o.nnz << ',';
        write_double(out, o.phi);
        out << '\n';
    }
    out.precision(old_precision);
}

ExperimentResult run_experiment(const ProblemInstance& problem, const ExperimentConfig& config)
{
    if (config.trials == 0) throw InvalidInput("trials must be at least 1");
    const SQMatrix& m = *problem.matrix;
    const std::span<const double> b(problem.b.data(), static_cast<std::size_t>(problem.b.size()));

    ExperimentResult result;
    result.params = resolve_params(problem, config.eps, config.overrides);
    const SolverParams& p = result.params;

    // recorded iterations, sorted and unique, always including 0 and K
    std::vector<std::size_t> ks = config.record_at;
    if (ks.empty()) {
        const std::size_t every = config.record_every ? config.record_every : std::max<std::size_t>(1, p.K / 50);
        for (std::size_t k = 0; k <= p.K; k += every) ks.push_back(k);
    }
    ks.push_back(0);
    ks.push_back(p.K);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    ks.erase(std::remove_if(ks.begin(), ks.end(), [&](std::size_t k) { return k > p.K; }), ks.end());
    result.ks = ks;

    const std::size_t nk = ks.size();
    auto slot_of = [&](std::size_t k) -> std::ptrdiff_t {
        auto it = std::lower_bound(ks.begin(), ks.end(), k);
        return (it != ks.end() && *it == k) ? it - ks.begin() : -1;
    };

    // [trial][record]
    std::vector<std::vector<double>> alg1_err(config.trials, std::vector<double>(nk, kNaN));
    std::vector<std::vector<double>> alg1_phi(config.trials, std::vector<double>(nk, kNaN));
    std::vector<std::vector<double>> rk_err(config.trials, std::vector<double>(nk, kNaN));

    const RandomStream master(config.seed);
    stats::parallel_for(config.trials, config.threads, [&](std::size_t t) {
        const RandomStream trial_stream = master.split(t);

        RandomStream alg1_rng = trial_stream.split(0);
        alg1_err[t][0] = relative_error(DenseVector::Zero(static_cast<Eigen::Index>(m.cols())), problem.x_star);
        solve(problem.matrix, b, p, alg1_rng, [&](std::size_t k, const SparseIterate& y) {
            const auto s = slot_of(k);
            if (s < 0) return;
            const DenseVector x = dual_to_primal(m, y);
            alg1_err[t][static_cast<std::size_t>(s)] = relative_error(x, problem.x_star);
            alg1_phi[t][static_cast<std::size_t>(s)] = phi_or_nan(m, y, x);
        });

        RandomStream rk_rng = trial_stream.split(1);
        DenseVector x = DenseVector::Zero(static_cast<Eigen::Index>(m.cols()));
        rk_err[t][0] = relative_error(x, problem.x_star);
        std::vector<Index> rows(p.R);
        for (std::size_t k = 1; k <= p.K; ++k) {
            for (auto& r : rows) r = m.sample_row(rk_rng);
            x = reference::rk_averaging_step(m, problem.b, x, rows, p.alpha);
            const auto s = slot_of(k);
            if (s >= 0) rk_err[t][static_cast<std::size_t>(s)] = relative_error(x, problem.x_star);
        }
    });

    const auto gd = reference::gd_iterates(m, problem.b, p.alpha, p.K);

    auto summarize = [&](const std::string& alg, const std::string& metric,
                         const std::vector<std::vector<double>>& data, std::size_t from) {
        for (std::size_t s = 0; s < nk; ++s) {
            if (ks[s] < from) continue;
            std::vector<double> column(config.trials);
            for (std::size_t t = 0; t < config.trials; ++t) column[t] = data[t][s];
            result.rows.push_back({alg, metric, ks[s], stats::quantile(column, 0.5),
                                   stats::quantile(column, 0.05), stats::quantile(column, 0.95)});
        }
    };
    summarize("alg1", "error", alg1_err, 0);
    summarize("rk-averaging", "error", rk_err, 0);
    for (std::size_t s = 0; s < nk; ++s) {
        const double e = relative_error(gd[ks[s]], problem.x_star);
        result.rows.push_back({"gd", "error", ks[s], e, e, e});
    }
    summarize("alg1", "phi", alg1_phi, 1);
    return result;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& rows)
{
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "algorithm,metric,k,median,q05,q95\n";
    for (const auto& r : rows) {
        out << r.algorithm << ',' << r.metric << ',' << r.k << ',';
        write_double(out, r.median);
        out << ',';
        write_double(out, r.q05);
        out << ',';
        write_double(out, r.q95);
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace sqsolve::experiment
